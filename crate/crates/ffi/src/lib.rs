//! C interface to `prlab`.
//!
//! Every fallible call returns a [`PrlabStatus`]; on failure the message is
//! kept per thread and read with [`prlab_last_error`]. Handles are opaque
//! and owned by the caller until passed to the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use prlab::analysis_checks::estimate_sobolev_constant;
use prlab::diophantine::{construct_lstar, ContinuedFraction, DEFAULT_BIT_BUDGET};
use prlab::floer_solver::{
    choose_truncation, energy::l2_s_derivative, solve_floer, CylinderGrid, FloerSolution, NAlpha,
    SolverConfig,
};
use prlab::hamiltonian_disk::{iterate, DiskPoint, FlowConfig, Hamiltonian};
use prlab::rigidity_lab::{c0_distance_to_identity, ProbeGrid};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Arithmetic = 3,
    NotConverged = 4,
    BufferTooSmall = 5,
    Panic = 99,
}

/// Continued fraction with certified tail.
pub struct PrlabAlpha(ContinuedFraction);

pub struct PrlabHamiltonian(Hamiltonian);

pub struct PrlabFloerSolution(FloerSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: PrlabStatus, msg: impl Into<String>) -> PrlabStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PrlabStatus) -> PrlabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PrlabStatus::Panic, msg)
        }
    }
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(PrlabStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next `prlab_*` call on the same thread.
#[no_mangle]
pub extern "C" fn prlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn prlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds `[seed_0; seed_1, …]` extended by the exponential rule to depth
/// `depth`.
///
/// # Safety
/// `seed` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_alpha_construct(
    seed: *const i64,
    len: usize,
    depth: usize,
    out: *mut *mut PrlabAlpha,
) -> PrlabStatus {
    guard(|| {
        nonnull!(seed, out);
        if len == 0 {
            return fail(PrlabStatus::InvalidArgument, "empty seed");
        }
        let s: Vec<BigInt> = std::slice::from_raw_parts(seed, len)
            .iter()
            .map(|&v| BigInt::from(v))
            .collect();
        match construct_lstar(depth, &s, DEFAULT_BIT_BUDGET) {
            Ok(cf) => {
                *out = Box::into_raw(Box::new(PrlabAlpha(cf)));
                PrlabStatus::Ok
            }
            Err(e) => fail(PrlabStatus::Arithmetic, e.to_string()),
        }
    })
}

/// # Safety
/// `a` must come from `prlab_alpha_construct` and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn prlab_alpha_free(a: *mut PrlabAlpha) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Index of the last stored partial quotient.
///
/// # Safety
/// `a` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_alpha_depth(a: *const PrlabAlpha, out: *mut usize) -> PrlabStatus {
    guard(|| {
        nonnull!(a, out);
        *out = (*a).0.depth();
        PrlabStatus::Ok
    })
}

/// Decimal digits of `a_m` (`m = 0` is the integer part) into `buf`,
/// NUL-terminated. `needed` receives the required size including the NUL.
///
/// # Safety
/// `a` live; `buf` writable for `len` bytes (may be NULL when `len == 0`);
/// `needed` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_alpha_quotient(
    a: *const PrlabAlpha,
    m: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> PrlabStatus {
    guard(|| {
        nonnull!(a, needed);
        let cf = &(*a).0;
        if m > cf.depth() {
            return fail(
                PrlabStatus::InvalidArgument,
                format!("m = {m} beyond depth {}", cf.depth()),
            );
        }
        let digits = cf.quotient(m).to_string();
        *needed = digits.len() + 1;
        if len < digits.len() + 1 || buf.is_null() {
            return fail(
                PrlabStatus::BufferTooSmall,
                format!("need {} bytes", digits.len() + 1),
            );
        }
        ptr::copy_nonoverlapping(digits.as_ptr(), buf.cast(), digits.len());
        *buf.add(digits.len()) = 0;
        PrlabStatus::Ok
    })
}

/// Outward-rounded enclosure of `{nα}`.
///
/// # Safety
/// `a` live; `lo`, `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_alpha_fractional_part(
    a: *const PrlabAlpha,
    n: u64,
    lo: *mut f64,
    hi: *mut f64,
) -> PrlabStatus {
    guard(|| {
        nonnull!(a, lo, hi);
        match (*a).0.fractional_part_multiple(&BigInt::from(n)) {
            Ok(f) => {
                let (l, h) = f.as_interval().to_f64_outward();
                *lo = l;
                *hi = h;
                PrlabStatus::Ok
            }
            Err(e) => fail(PrlabStatus::Arithmetic, e.to_string()),
        }
    })
}

/// Midpoint of the value enclosure.
///
/// # Safety
/// `a` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_alpha_value(a: *const PrlabAlpha, out: *mut f64) -> PrlabStatus {
    guard(|| {
        nonnull!(a, out);
        *out = (*a).0.approx_f64();
        PrlabStatus::Ok
    })
}

fn boxed_hamiltonian(h: Hamiltonian, out: *mut *mut PrlabHamiltonian) -> PrlabStatus {
    if let Err(e) = h.validate() {
        return fail(PrlabStatus::InvalidArgument, e.to_string());
    }
    // SAFETY: callers check `out` for null.
    unsafe { *out = Box::into_raw(Box::new(PrlabHamiltonian(h))) };
    PrlabStatus::Ok
}

/// Rigid rotation by `2πα` per unit time.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_hamiltonian_rigid(
    alpha: f64,
    out: *mut *mut PrlabHamiltonian,
) -> PrlabStatus {
    guard(|| {
        nonnull!(out);
        boxed_hamiltonian(Hamiltonian::rigid(alpha), out)
    })
}

/// Rigid rotation plus `ε` times the standard bump set.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_hamiltonian_perturbed(
    alpha: f64,
    epsilon: f64,
    out: *mut *mut PrlabHamiltonian,
) -> PrlabStatus {
    guard(|| {
        nonnull!(out);
        boxed_hamiltonian(Hamiltonian::perturbed_standard(alpha, epsilon), out)
    })
}

/// # Safety
/// `h` must come from a `prlab_hamiltonian_*` constructor and not be freed.
#[no_mangle]
pub unsafe extern "C" fn prlab_hamiltonian_free(h: *mut PrlabHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `φⁿ(x, y)` with RK4 step `step` (`n < 0` integrates backward).
///
/// # Safety
/// `h` live; `out_x`, `out_y` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_iterate(
    h: *const PrlabHamiltonian,
    x: f64,
    y: f64,
    n: i64,
    step: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> PrlabStatus {
    guard(|| {
        nonnull!(h, out_x, out_y);
        if !(step > 0.0) {
            return fail(PrlabStatus::InvalidArgument, "step must be positive");
        }
        let cfg = FlowConfig {
            step,
            ..FlowConfig::default()
        };
        match iterate(&(*h).0, DiskPoint::new(x, y), n, &cfg) {
            Ok(p) => {
                *out_x = p.x;
                *out_y = p.y;
                PrlabStatus::Ok
            }
            Err(e) => fail(PrlabStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Max displacement of `φⁿ` over a polar probe grid of spacing `probe_h`.
///
/// # Safety
/// `h` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_c0_distance(
    h: *const PrlabHamiltonian,
    n: u64,
    probe_h: f64,
    step: f64,
    out: *mut f64,
) -> PrlabStatus {
    guard(|| {
        nonnull!(h, out);
        if !(probe_h > 0.0 && probe_h <= 1.0 && step > 0.0) {
            return fail(
                PrlabStatus::InvalidArgument,
                "need 0 < probe_h <= 1 and step > 0",
            );
        }
        let cfg = FlowConfig {
            step,
            ..FlowConfig::default()
        };
        match c0_distance_to_identity(&(*h).0, n, &ProbeGrid { h: probe_h }, 0.0, &cfg) {
            Ok(d) => {
                *out = d.measured;
                PrlabStatus::Ok
            }
            Err(e) => fail(PrlabStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Solves the Floer equation for `h` with period `n` on an `ns × nt` grid,
/// truncated where the rigid tail falls below `tail_tol`. A solution that
/// does not converge is still returned through `out`, with status
/// `NOT_CONVERGED`.
///
/// # Safety
/// `h`, `alpha` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_floer_solve(
    h: *const PrlabHamiltonian,
    alpha: *const PrlabAlpha,
    n: u32,
    ns: usize,
    nt: usize,
    tail_tol: f64,
    out: *mut *mut PrlabFloerSolution,
) -> PrlabStatus {
    guard(|| {
        nonnull!(h, alpha, out);
        *out = ptr::null_mut();
        let iv = (*alpha).0.value_enclosure();
        let na = match NAlpha::from_enclosure(&iv, n) {
            Ok(v) => v,
            Err(e) => return fail(PrlabStatus::InvalidArgument, e.to_string()),
        };
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return fail(PrlabStatus::InvalidArgument, "tail_tol must lie in (0, 1)");
        }
        let trunc = choose_truncation(na.frac_hi, n, tail_tol, 1e6);
        if !trunc.feasible {
            return fail(
                PrlabStatus::InvalidArgument,
                "{nα} too small for a finite cylinder",
            );
        }
        let grid = match CylinderGrid::new(n, trunc.s_max, ns, nt) {
            Ok(g) => g,
            Err(e) => return fail(PrlabStatus::InvalidArgument, e.to_string()),
        };
        match solve_floer(&(*h).0, n, &iv, &grid, None, &SolverConfig::default()) {
            Ok(sol) => {
                let converged = sol.converged;
                let residual = sol.residual_norm;
                *out = Box::into_raw(Box::new(PrlabFloerSolution(sol)));
                if converged {
                    PrlabStatus::Ok
                } else {
                    fail(
                        PrlabStatus::NotConverged,
                        format!("residual {residual:e} above tolerance"),
                    )
                }
            }
            Err(e) => fail(PrlabStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// `‖∂ₛz‖²` in L² over the truncated half-cylinder.
///
/// # Safety
/// `sol` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_floer_l2_s_derivative(
    sol: *const PrlabFloerSolution,
    out: *mut f64,
) -> PrlabStatus {
    guard(|| {
        nonnull!(sol, out);
        *out = l2_s_derivative(&(*sol).0);
        PrlabStatus::Ok
    })
}

/// Residual norm and winding number of the boundary loop.
///
/// # Safety
/// `sol` live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_floer_diagnostics(
    sol: *const PrlabFloerSolution,
    residual: *mut f64,
    winding: *mut i64,
) -> PrlabStatus {
    guard(|| {
        nonnull!(sol, residual, winding);
        *residual = (*sol).0.residual_norm;
        *winding = (*sol).0.measured_winding();
        PrlabStatus::Ok
    })
}

/// # Safety
/// `sol` must come from `prlab_floer_solve` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn prlab_floer_free(sol: *mut PrlabFloerSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Largest interpolation ratio over `trials` random half-cylinder probes of
/// each period in `periods`.
///
/// # Safety
/// `periods` readable for `len` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn prlab_sobolev_max_ratio(
    periods: *const u32,
    len: usize,
    trials: usize,
    seed: u64,
    out: *mut f64,
) -> PrlabStatus {
    guard(|| {
        nonnull!(periods, out);
        let ns = std::slice::from_raw_parts(periods, len);
        match estimate_sobolev_constant(true, ns, trials, seed) {
            Ok(t) => {
                *out = t.rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
                PrlabStatus::Ok
            }
            Err(e) => fail(PrlabStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Copies the last error into `buf` (truncated, always NUL-terminated when
/// `len > 0`); returns the full message length, 0 when there is none.
///
/// # Safety
/// `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn prlab_last_error_copy(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}
