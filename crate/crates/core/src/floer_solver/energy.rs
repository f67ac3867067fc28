use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{ds, dt};
use super::{field_c, FloerSolution};

fn zs(sol: &FloerSolution, i: usize, j: usize) -> Complex64 {
    ds(&sol.grid, &sol.z, i, j)
}

/// `∫∫ |∂_s z|²` by the trapezoid rule.
pub fn l2_s_derivative(sol: &FloerSolution) -> f64 {
    sol.grid.integrate(|i, j| zs(sol, i, j).norm_sqr())
}

/// `∫∫ |∂_s z|² + |∂_t z − X_{H^t}(z)|²`.
pub fn floer_energy(sol: &FloerSolution) -> f64 {
    let g = &sol.grid;
    g.integrate(|i, j| {
        let x = field_c(&sol.hamiltonian, g.t(j), sol.at(i, j));
        zs(sol, i, j).norm_sqr() + (dt(g, &sol.z, i, j) - x).norm_sqr()
    })
}

pub fn sup_norm_s_derivative(sol: &FloerSolution) -> f64 {
    let g = &sol.grid;
    let mut m: f64 = 0.0;
    for i in 0..=g.ns {
        for j in 0..g.nt {
            m = m.max(zs(sol, i, j).norm());
        }
    }
    m
}

/// `∫∫ u*ω_n` with `ω_n = dx∧dy + dτ∧dH` and `τ = t + t₀`.
fn omega_energy(sol: &FloerSolution) -> f64 {
    let g = &sol.grid;
    g.integrate(|i, j| {
        let z = sol.at(i, j);
        let a = zs(sol, i, j);
        let b = dt(g, &sol.z, i, j);
        let grad = sol.hamiltonian.jet(g.t(j), z.re, z.im).grad;
        (a.conj() * b).im - (grad[0] * a.re + grad[1] * a.im)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub floer_energy: f64,
    pub l2_s_derivative: f64,
    pub e_omega: f64,
    /// `n`, taken from the energy correspondence rather than a supremum.
    pub e_lambda: f64,
    pub target_lo: f64,
    pub target_hi: f64,
    /// `C_quad` in `|l2 − π{nα}| ≤ C_quad (hs² + ht²) + C_tail`.
    pub quad_constant: f64,
    /// Mass `π{nα} e^{−4π{nα}S/n}` of the rigid profile beyond `S`.
    pub tail_constant: f64,
    pub identity_gap: f64,
    pub identity_holds: bool,
}

/// Energies of a solution and the identity `‖∂_s z‖² = π{nα}`.
///
/// The constants are those of the rigid profile with decay rate `c`:
/// the central difference inflates `|∂_s z|²` by `c²hs²/3` relative, and
/// the trapezoid rule with one-sided end stencils adds at most `n c³ hs²/2`.
pub fn energy_report(sol: &FloerSolution) -> EnergyReport {
    let g = &sol.grid;
    let na = &sol.n_alpha;
    let l2 = l2_s_derivative(sol);
    let target_lo = PI * na.frac_lo;
    let target_hi = PI * na.frac_hi;
    let f = na.frac();
    let c = na.decay_rate();
    let quad_constant = PI * f * c * c / 3.0 + g.n as f64 * c.powi(3) / 2.0;
    let tail_constant = PI * f * (-2.0 * c * g.s_max).exp();
    let identity_gap = if l2 < target_lo {
        target_lo - l2
    } else if l2 > target_hi {
        l2 - target_hi
    } else {
        0.0
    };
    let allowed = quad_constant * (g.hs().powi(2) + g.ht().powi(2)) + tail_constant;
    EnergyReport {
        floer_energy: floer_energy(sol),
        l2_s_derivative: l2,
        e_omega: omega_energy(sol),
        e_lambda: g.n as f64,
        target_lo,
        target_hi,
        quad_constant,
        tail_constant,
        identity_gap,
        identity_holds: identity_gap <= allowed,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    /// `‖∂_s z‖_∞`.
    pub sup_norm: f64,
    /// `‖∂_s z‖_{L²}`.
    pub l2_norm: f64,
    /// `‖∂_s z‖_∞ + ‖D ∂_s z‖_∞`.
    pub w1_inf: f64,
    pub ratio: f64,
    pub c: f64,
    pub holds: bool,
    /// Supplied C¹ bound, always empirical.
    pub b: f64,
    /// `M = (cb)^{1/2} π^{1/4}`.
    pub m: f64,
    /// `M {nα}^{1/4}`, the predicted bound on `‖∂_s z‖_∞`.
    pub predicted_sup: f64,
}

/// Discrete `W^{1,∞}` norm of `∂_s z`.
pub fn w1_inf_s_derivative(sol: &FloerSolution) -> f64 {
    let g = &sol.grid;
    let d: Vec<Complex64> = (0..g.len()).map(|k| zs(sol, k / g.nt, k % g.nt)).collect();
    let mut sup: f64 = 0.0;
    let mut grad: f64 = 0.0;
    for i in 0..=g.ns {
        for j in 0..g.nt {
            sup = sup.max(d[g.idx(i, j)].norm());
            let a = ds(g, &d, i, j);
            let b = dt(g, &d, i, j);
            grad = grad.max((a.norm_sqr() + b.norm_sqr()).sqrt());
        }
    }
    sup + grad
}

/// Checks `‖∂_s z‖²_∞ ≤ c ‖∂_s z‖_{L²} ‖∂_s z‖_{W^{1,∞}}` on the solution.
pub fn interpolation_bound_check(sol: &FloerSolution, c: f64, b: f64) -> InterpolationReport {
    let sup_norm = sup_norm_s_derivative(sol);
    let l2_norm = l2_s_derivative(sol).sqrt();
    let w1_inf = w1_inf_s_derivative(sol);
    let ratio = if l2_norm * w1_inf > 0.0 {
        sup_norm * sup_norm / (l2_norm * w1_inf)
    } else {
        0.0
    };
    let m = (c * b).sqrt() * PI.powf(0.25);
    InterpolationReport {
        sup_norm,
        l2_norm,
        w1_inf,
        ratio,
        c,
        holds: ratio <= c,
        b,
        m,
        predicted_sup: m * sol.n_alpha.frac_hi.powf(0.25),
    }
}

/// Lift `u = (s + s₀, t + t₀, z)` to the symplectization of the mapping torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingTorusLift {
    pub solution: FloerSolution,
    pub s0: f64,
    pub t0: f64,
    /// Max over nodes of the lifted Cauchy–Riemann defect `|∂_s u + J ∂_t u|`.
    pub cr_residual_max: f64,
    pub e_omega: f64,
    pub e_lambda: f64,
    pub tau_degree: i64,
}

/// With `J(∂_a) = ∂_τ + X`, `J(∂_τ + X) = −∂_a` and `i` on the disk factor,
/// the `z`-component of `∂_s u + J ∂_t u` is the Floer residual.
pub fn lift_to_mapping_torus(sol: &FloerSolution, s0: f64, t0: f64) -> MappingTorusLift {
    let g = &sol.grid;
    let n = g.n as f64;
    let nt = g.nt;
    let a: Vec<f64> = (0..=g.ns).map(|i| g.s(i) + s0).collect();
    let tau: Vec<f64> = (0..nt).map(|j| (g.t(j) + t0).rem_euclid(n)).collect();
    // τ is circle valued; differences are taken on the lift.
    let dtau = |j: usize| -> f64 {
        let d = |k: isize| -> f64 {
            let jj = (j as isize + k).rem_euclid(nt as isize) as usize;
            let mut v = tau[jj] - tau[j];
            v -= n * (v / n).round();
            v
        };
        (8.0 * (d(1) - d(-1)) - (d(2) - d(-2))) / (12.0 * g.ht())
    };
    let das = |i: usize| -> f64 {
        let c = 0.5 / g.hs();
        if i == 0 {
            (-3.0 * a[0] + 4.0 * a[1] - a[2]) * c
        } else if i == g.ns {
            (3.0 * a[i] - 4.0 * a[i - 1] + a[i - 2]) * c
        } else {
            (a[i + 1] - a[i - 1]) * c
        }
    };
    let mut cr: f64 = 0.0;
    for i in 0..=g.ns {
        for j in 0..nt {
            let z = sol.at(i, j);
            let x = field_c(&sol.hamiltonian, g.t(j), z);
            // ∂_t u = (0, τ_t, z_t), J∂_t u = (−τ_t, 0, i(z_t − τ_t X)).
            let ra = das(i) - dtau(j);
            let rtau = 0.0;
            let rz = zs(sol, i, j) + Complex64::i() * (dt(g, &sol.z, i, j) - x * dtau(j));
            cr = cr.max((ra * ra + rtau * rtau + rz.norm_sqr()).sqrt());
        }
    }
    let mut turn = 0.0;
    for j in 0..nt {
        let mut v = tau[(j + 1) % nt] - tau[j];
        v -= n * (v / n).round();
        turn += v;
    }
    MappingTorusLift {
        solution: sol.clone(),
        s0,
        t0,
        cr_residual_max: cr,
        e_omega: omega_energy(sol),
        e_lambda: n,
        tau_degree: (turn / n).round() as i64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::ContinuedFraction;
    use crate::floer_solver::{rigid_rotation_exact_solution, CylinderGrid};

    fn oracle(ns: usize, nt: usize) -> FloerSolution {
        let alpha = ContinuedFraction::golden(40).value_enclosure();
        let g = CylinderGrid::new(5, 81.3, ns, nt).unwrap();
        rigid_rotation_exact_solution(&alpha, 5, 0.7, &g).unwrap()
    }

    #[test]
    fn oracle_energies_match_closed_forms() {
        let sol = oracle(256, 512);
        let r = energy_report(&sol);
        let f = 0.090_169_943_749_474_2;
        assert!(
            (r.l2_s_derivative - PI * f).abs() < 1e-3,
            "{}",
            r.l2_s_derivative
        );
        assert!(
            (r.floer_energy - 2.0 * PI * f).abs() < 2e-3,
            "{}",
            r.floer_energy
        );
        assert!((r.e_omega - PI * f).abs() < 1e-3, "{}", r.e_omega);
        assert!(r.identity_holds, "{r:?}");
        assert_eq!(r.e_lambda, 5.0);
    }

    #[test]
    fn quadrature_error_is_second_order() {
        let f = 0.090_169_943_749_474_2;
        let exact = PI * f * (1.0 - (-2.0 * 2.0 * PI * f / 5.0 * 81.3f64).exp());
        let e1 = (l2_s_derivative(&oracle(256, 32)) - exact).abs();
        let e2 = (l2_s_derivative(&oracle(512, 32)) - exact).abs();
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
    }

    #[test]
    fn sup_of_s_derivative_sits_at_the_boundary() {
        let sol = oracle(512, 64);
        let c = sol.n_alpha.decay_rate();
        assert!((sup_norm_s_derivative(&sol) - c).abs() < 1e-4);
    }

    #[test]
    fn lift_relation_and_degrees() {
        let sol = oracle(128, 256);
        let lift = lift_to_mapping_torus(&sol, 1.5, 0.25);
        assert_eq!(lift.tau_degree, 1);
        assert_eq!(lift.e_lambda, 5.0);
        assert!((lift.cr_residual_max - sol.residual_max).abs() < 1e-9);
    }

    #[test]
    fn interpolation_chain_on_oracle() {
        let sol = oracle(256, 128);
        let rep = interpolation_bound_check(&sol, 20.78, 1.0);
        assert!(rep.holds, "{rep:?}");
        assert!(rep.ratio > 0.0);
        let rep2 = interpolation_bound_check(&sol, 20.78, 4.0);
        assert!((rep2.m / rep.m - 2.0).abs() < 1e-12);
    }
}
