#ifndef PRLAB_H
#define PRLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PrlabStatus {
  PRLAB_STATUS_OK = 0,
  PRLAB_STATUS_NULL_POINTER = 1,
  PRLAB_STATUS_INVALID_ARGUMENT = 2,
  PRLAB_STATUS_ARITHMETIC = 3,
  PRLAB_STATUS_NOT_CONVERGED = 4,
  PRLAB_STATUS_BUFFER_TOO_SMALL = 5,
  PRLAB_STATUS_PANIC = 99,
} PrlabStatus;

/**
 * Continued fraction with certified tail.
 */
typedef struct PrlabAlpha PrlabAlpha;

typedef struct PrlabFloerSolution PrlabFloerSolution;

typedef struct PrlabHamiltonian PrlabHamiltonian;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next `prlab_*` call on the same thread.
 */
const char *prlab_last_error(void);

/**
 * Static, NUL-terminated version string.
 */
const char *prlab_version(void);

/**
 * Builds `[seed_0; seed_1, …]` extended by the exponential rule to depth
 * `depth`.
 *
 * # Safety
 * `seed` must point to `len` readable values; `out` must be writable.
 */
enum PrlabStatus prlab_alpha_construct(const int64_t *seed,
                                       uintptr_t len,
                                       uintptr_t depth,
                                       struct PrlabAlpha **out);

/**
 * # Safety
 * `a` must come from `prlab_alpha_construct` and not be freed already.
 */
void prlab_alpha_free(struct PrlabAlpha *a);

/**
 * Index of the last stored partial quotient.
 *
 * # Safety
 * `a` must be a live handle; `out` writable.
 */
enum PrlabStatus prlab_alpha_depth(const struct PrlabAlpha *a, uintptr_t *out);

/**
 * Decimal digits of `a_m` (`m = 0` is the integer part) into `buf`,
 * NUL-terminated. `needed` receives the required size including the NUL.
 *
 * # Safety
 * `a` live; `buf` writable for `len` bytes (may be NULL when `len == 0`);
 * `needed` writable.
 */
enum PrlabStatus prlab_alpha_quotient(const struct PrlabAlpha *a,
                                      uintptr_t m,
                                      char *buf,
                                      uintptr_t len,
                                      uintptr_t *needed);

/**
 * Outward-rounded enclosure of `{nα}`.
 *
 * # Safety
 * `a` live; `lo`, `hi` writable.
 */
enum PrlabStatus prlab_alpha_fractional_part(const struct PrlabAlpha *a,
                                             uint64_t n,
                                             double *lo,
                                             double *hi);

/**
 * Midpoint of the value enclosure.
 *
 * # Safety
 * `a` live; `out` writable.
 */
enum PrlabStatus prlab_alpha_value(const struct PrlabAlpha *a, double *out);

/**
 * Rigid rotation by `2πα` per unit time.
 *
 * # Safety
 * `out` writable.
 */
enum PrlabStatus prlab_hamiltonian_rigid(double alpha, struct PrlabHamiltonian **out);

/**
 * Rigid rotation plus `ε` times the standard bump set.
 *
 * # Safety
 * `out` writable.
 */
enum PrlabStatus prlab_hamiltonian_perturbed(double alpha,
                                             double epsilon,
                                             struct PrlabHamiltonian **out);

/**
 * # Safety
 * `h` must come from a `prlab_hamiltonian_*` constructor and not be freed.
 */
void prlab_hamiltonian_free(struct PrlabHamiltonian *h);

/**
 * `φⁿ(x, y)` with RK4 step `step` (`n < 0` integrates backward).
 *
 * # Safety
 * `h` live; `out_x`, `out_y` writable.
 */
enum PrlabStatus prlab_iterate(const struct PrlabHamiltonian *h,
                               double x,
                               double y,
                               int64_t n,
                               double step,
                               double *out_x,
                               double *out_y);

/**
 * Max displacement of `φⁿ` over a polar probe grid of spacing `probe_h`.
 *
 * # Safety
 * `h` live; `out` writable.
 */
enum PrlabStatus prlab_c0_distance(const struct PrlabHamiltonian *h,
                                   uint64_t n,
                                   double probe_h,
                                   double step,
                                   double *out);

/**
 * Solves the Floer equation for `h` with period `n` on an `ns × nt` grid,
 * truncated where the rigid tail falls below `tail_tol`. A solution that
 * does not converge is still returned through `out`, with status
 * `NOT_CONVERGED`.
 *
 * # Safety
 * `h`, `alpha` live; `out` writable.
 */
enum PrlabStatus prlab_floer_solve(const struct PrlabHamiltonian *h,
                                   const struct PrlabAlpha *alpha,
                                   uint32_t n,
                                   uintptr_t ns,
                                   uintptr_t nt,
                                   double tail_tol,
                                   struct PrlabFloerSolution **out);

/**
 * `‖∂ₛz‖²` in L² over the truncated half-cylinder.
 *
 * # Safety
 * `sol` live; `out` writable.
 */
enum PrlabStatus prlab_floer_l2_s_derivative(const struct PrlabFloerSolution *sol, double *out);

/**
 * Residual norm and winding number of the boundary loop.
 *
 * # Safety
 * `sol` live; outputs writable.
 */
enum PrlabStatus prlab_floer_diagnostics(const struct PrlabFloerSolution *sol,
                                         double *residual,
                                         int64_t *winding);

/**
 * # Safety
 * `sol` must come from `prlab_floer_solve` and not be freed.
 */
void prlab_floer_free(struct PrlabFloerSolution *sol);

/**
 * Largest interpolation ratio over `trials` random half-cylinder probes of
 * each period in `periods`.
 *
 * # Safety
 * `periods` readable for `len` values; `out` writable.
 */
enum PrlabStatus prlab_sobolev_max_ratio(const uint32_t *periods,
                                         uintptr_t len,
                                         uintptr_t trials,
                                         uint64_t seed,
                                         double *out);

/**
 * Copies the last error into `buf` (truncated, always NUL-terminated when
 * `len > 0`); returns the full message length, 0 when there is none.
 *
 * # Safety
 * `buf` writable for `len` bytes.
 */
uintptr_t prlab_last_error_copy(char *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRLAB_H */
