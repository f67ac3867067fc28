//! Time-periodic Hamiltonians on the closed unit disk and their flows.

pub mod bounds;
pub mod flow;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{
    area_preservation_defect, boundary_rotation_number, check_standing_assumptions, hessian_bound,
    AssumptionReport, HessianBound, HessianGrid, RotationEstimate,
};
pub use flow::{
    advance, flow, iterate, orbit_at_integer_times, time_one_map, FlowConfig, Scheme, Trajectory,
};

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("trajectory left the disk: |p| = {radius} at t = {time} (tolerance {tolerance})")]
    IntegrationDrift {
        time: f64,
        radius: f64,
        tolerance: f64,
    },
    #[error("step-halving check failed: {difference:e} > {tolerance:e}")]
    StepValidation { difference: f64, tolerance: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub x: f64,
    pub y: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, o: &DiskPoint) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    /// Membership in the closed disk up to `tol`.
    pub fn in_disk(&self, tol: f64) -> bool {
        self.norm() <= 1.0 + tol
    }
}

/// Radial-times-angular bump `ρ^j (1−ρ)^3 Re(e^{i(2π m t + phase)} (x+iy)^k)`
/// with `ρ = x² + y²`. It vanishes to second order on the boundary circle and
/// to order `2j + k ≥ 2` at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub j: u32,
    pub k: u32,
    #[serde(default)]
    pub m: i32,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Value, gradient and Hessian `[hxx, hxy, hyy]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl Jet {
    fn scaled(self, c: f64) -> Jet {
        Jet {
            value: c * self.value,
            grad: [c * self.grad[0], c * self.grad[1]],
            hess: [c * self.hess[0], c * self.hess[1], c * self.hess[2]],
        }
    }

    fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]],
            hess: [
                self.hess[0] + o.hess[0],
                self.hess[1] + o.hess[1],
                self.hess[2] + o.hess[2],
            ],
        }
    }
}

/// Complex power `w^k` as (re, im).
fn cpow(x: f64, y: f64, k: u32) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..k {
        (re, im) = (re * x - im * y, re * y + im * x);
    }
    (re, im)
}

impl Bump {
    pub fn new(j: u32, k: u32, m: i32, phase: f64, amplitude: f64) -> Self {
        Self {
            j,
            k,
            m,
            phase,
            amplitude,
        }
    }

    /// Two-bump perturbation used as the default test family.
    pub fn standard_set() -> Vec<Bump> {
        vec![Bump::new(1, 0, 1, 0.2, 1.0), Bump::new(0, 3, 2, 0.0, 1.0)]
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if 2 * self.j + self.k < 2 {
            return Err(HamiltonianError::InvalidInput(format!(
                "bump with j = {}, k = {} does not vanish to second order at the origin",
                self.j, self.k
            )));
        }
        if !self.phase.is_finite() || !self.amplitude.is_finite() {
            return Err(HamiltonianError::InvalidInput(
                "non-finite bump parameter".into(),
            ));
        }
        Ok(())
    }

    pub fn jet(&self, t: f64, x: f64, y: f64) -> Jet {
        let rho = x * x + y * y;
        // R(ρ) = ρ^j (1 − ρ)^3 = ρ^j − 3ρ^{j+1} + 3ρ^{j+2} − ρ^{j+3}
        let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
        for (c, e) in [(1.0, 0), (-3.0, 1), (3.0, 2), (-1.0, 3)] {
            let p = (self.j + e) as i32;
            r0 += c * rho.powi(p);
            if p >= 1 {
                r1 += c * p as f64 * rho.powi(p - 1);
            }
            if p >= 2 {
                r2 += c * (p * (p - 1)) as f64 * rho.powi(p - 2);
            }
        }
        let rx = 2.0 * x * r1;
        let ry = 2.0 * y * r1;
        let rxx = 4.0 * x * x * r2 + 2.0 * r1;
        let rxy = 4.0 * x * y * r2;
        let ryy = 4.0 * y * y * r2 + 2.0 * r1;

        let psi = 2.0 * PI * self.m as f64 * t + self.phase;
        let (c, s) = (psi.cos(), psi.sin());
        let k = self.k;
        // Re(e^{iψ} u) for u = (a, b)
        let re = |a: f64, b: f64| c * a - s * b;
        let im = |a: f64, b: f64| c * b + s * a;
        let (a0, b0) = cpow(x, y, k);
        let p = re(a0, b0);
        let (px, py) = if k >= 1 {
            let (a, b) = cpow(x, y, k - 1);
            let kf = k as f64;
            (kf * re(a, b), -kf * im(a, b))
        } else {
            (0.0, 0.0)
        };
        let (pxx, pxy) = if k >= 2 {
            let (a, b) = cpow(x, y, k - 2);
            let kk = (k * (k - 1)) as f64;
            (kk * re(a, b), -kk * im(a, b))
        } else {
            (0.0, 0.0)
        };
        let pyy = -pxx;

        Jet {
            value: r0 * p,
            grad: [rx * p + r0 * px, ry * p + r0 * py],
            hess: [
                rxx * p + 2.0 * rx * px + r0 * pxx,
                rxy * p + rx * py + ry * px + r0 * pxy,
                ryy * p + 2.0 * ry * py + r0 * pyy,
            ],
        }
        .scaled(self.amplitude)
    }
}

/// One stage of a conjugation `h = φ_{K_s} ∘ … ∘ φ_{K_1}`; each `K_i` is an
/// autonomous sum of bumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub bumps: Vec<Bump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Hamiltonian {
    Zero,
    /// `πα̂(x² + y²)`: rotation by `2πα̂` per unit time.
    Rigid {
        alpha: f64,
    },
    /// `πα̂(x² + y²) + ε Σ bumps`.
    Perturbed {
        alpha: f64,
        epsilon: f64,
        bumps: Vec<Bump>,
    },
    /// Time-one map `h⁻¹ ∘ R ∘ h` built from `2s + 1` time slots.
    Staged {
        alpha: f64,
        stages: Vec<Stage>,
    },
    /// `Ĥ(t, p) = −H(−t, p)`, generating the inverse map.
    Inverse {
        inner: Box<Hamiltonian>,
    },
}

fn slot_weight(t: f64, slots: usize) -> (usize, f64) {
    let len = 1.0 / slots as f64;
    let tau = t.rem_euclid(1.0);
    let i = ((tau / len) as usize).min(slots - 1);
    let u = (tau - i as f64 * len) / len;
    let s = (PI * u).sin();
    (i, 2.0 / len * s * s)
}

impl Hamiltonian {
    pub fn rigid(alpha: f64) -> Self {
        Hamiltonian::Rigid { alpha }
    }

    pub fn perturbed(alpha: f64, epsilon: f64, bumps: Vec<Bump>) -> Self {
        Hamiltonian::Perturbed {
            alpha,
            epsilon,
            bumps,
        }
    }

    /// `perturbed` with [`Bump::standard_set`].
    pub fn perturbed_standard(alpha: f64, epsilon: f64) -> Self {
        Self::perturbed(alpha, epsilon, Bump::standard_set())
    }

    pub fn inverse(&self) -> Self {
        match self {
            Hamiltonian::Inverse { inner } => (**inner).clone(),
            other => Hamiltonian::Inverse {
                inner: Box::new(other.clone()),
            },
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Hamiltonian::Zero => "zero",
            Hamiltonian::Rigid { .. } => "rigid",
            Hamiltonian::Perturbed { .. } => "perturbed",
            Hamiltonian::Staged { .. } => "staged",
            Hamiltonian::Inverse { .. } => "inverse",
        }
    }

    /// Rotation parameter α̂ of the underlying rigid part, signed for inverses.
    pub fn alpha(&self) -> f64 {
        match self {
            Hamiltonian::Zero => 0.0,
            Hamiltonian::Rigid { alpha }
            | Hamiltonian::Perturbed { alpha, .. }
            | Hamiltonian::Staged { alpha, .. } => *alpha,
            Hamiltonian::Inverse { inner } => -inner.alpha(),
        }
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(HamiltonianError::InvalidInput(format!(
                    "{what} is not finite"
                )))
            }
        };
        match self {
            Hamiltonian::Zero => Ok(()),
            Hamiltonian::Rigid { alpha } => finite(*alpha, "alpha"),
            Hamiltonian::Perturbed {
                alpha,
                epsilon,
                bumps,
            } => {
                finite(*alpha, "alpha")?;
                finite(*epsilon, "epsilon")?;
                bumps.iter().try_for_each(Bump::validate)
            }
            Hamiltonian::Staged { alpha, stages } => {
                finite(*alpha, "alpha")?;
                stages
                    .iter()
                    .flat_map(|s| s.bumps.iter())
                    .try_for_each(Bump::validate)
            }
            Hamiltonian::Inverse { inner } => inner.validate(),
        }
    }

    /// Value, gradient and Hessian of `H(t, ·)` at `(x, y)`.
    pub fn jet(&self, t: f64, x: f64, y: f64) -> Jet {
        match self {
            Hamiltonian::Zero => Jet::default(),
            Hamiltonian::Rigid { alpha } => rigid_jet(*alpha, x, y),
            Hamiltonian::Perturbed {
                alpha,
                epsilon,
                bumps,
            } => {
                let mut j = rigid_jet(*alpha, x, y);
                if *epsilon != 0.0 {
                    for b in bumps {
                        j = j.add(b.jet(t, x, y).scaled(*epsilon));
                    }
                }
                j
            }
            Hamiltonian::Staged { alpha, stages } => {
                let s = stages.len();
                let (slot, w) = slot_weight(t, 2 * s + 1);
                let (stage, sign) = if slot < s {
                    (Some(&stages[slot]), 1.0)
                } else if slot == s {
                    (None, 1.0)
                } else {
                    (Some(&stages[2 * s - slot]), -1.0)
                };
                match stage {
                    None => rigid_jet(*alpha, x, y).scaled(w),
                    Some(st) => st
                        .bumps
                        .iter()
                        .fold(Jet::default(), |acc, b| acc.add(b.jet(0.0, x, y)))
                        .scaled(sign * w),
                }
            }
            Hamiltonian::Inverse { inner } => inner.jet(-t, x, y).scaled(-1.0),
        }
    }

    /// Times in `[0, 1)` where `H` is only piecewise smooth in t.
    pub fn time_breakpoints(&self) -> Vec<f64> {
        match self {
            Hamiltonian::Staged { stages, .. } => {
                let slots = 2 * stages.len() + 1;
                (0..slots).map(|i| i as f64 / slots as f64).collect()
            }
            Hamiltonian::Inverse { inner } => {
                let mut v: Vec<f64> = inner
                    .time_breakpoints()
                    .into_iter()
                    .map(|b| (-b).rem_euclid(1.0))
                    .collect();
                v.sort_by(f64::total_cmp);
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn evaluate(&self, t: f64, p: DiskPoint) -> f64 {
        self.jet(t, p.x, p.y).value
    }

    pub fn gradient(&self, t: f64, p: DiskPoint) -> [f64; 2] {
        self.jet(t, p.x, p.y).grad
    }

    pub fn hessian(&self, t: f64, p: DiskPoint) -> [[f64; 2]; 2] {
        let h = self.jet(t, p.x, p.y).hess;
        [[h[0], h[1]], [h[1], h[2]]]
    }

    /// `X = (−∂H/∂y, ∂H/∂x)`, from `ω₀(X, ·) = −dH` with `ω₀ = dx∧dy`.
    pub fn vector_field(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let g = self.jet(t, x, y).grad;
        [-g[1], g[0]]
    }

    /// The field together with its Jacobian `[[∂x X₁, ∂y X₁], [∂x X₂, ∂y X₂]]`.
    pub fn vector_field_jacobian(&self, t: f64, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let j = self.jet(t, x, y);
        let [hxx, hxy, hyy] = j.hess;
        ([-j.grad[1], j.grad[0]], [[-hxy, -hyy], [hxx, hxy]])
    }
}

fn rigid_jet(alpha: f64, x: f64, y: f64) -> Jet {
    let c = PI * alpha;
    Jet {
        value: c * (x * x + y * y),
        grad: [2.0 * c * x, 2.0 * c * y],
        hess: [2.0 * c, 0.0, 2.0 * c],
    }
}

/// Hamiltonian vector field at `(t, p)`.
pub fn hamiltonian_vector_field(h: &Hamiltonian, t: f64, p: DiskPoint) -> [f64; 2] {
    h.vector_field(t, p.x, p.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_bumps() -> Vec<Bump> {
        vec![
            Bump::new(1, 0, 1, 0.3, 1.0),
            Bump::new(0, 2, -2, 1.1, 0.7),
            Bump::new(2, 3, 0, -0.4, 0.5),
            Bump::new(1, 1, 3, 0.0, 1.3),
        ]
    }

    #[test]
    fn rigid_field_at_boundary() {
        let h = Hamiltonian::rigid(0.3);
        let v = hamiltonian_vector_field(&h, 0.2, DiskPoint::new(1.0, 0.0));
        assert!(v[0].abs() < 1e-15);
        assert!((v[1] - 2.0 * PI * 0.3).abs() < 1e-14);
    }

    #[test]
    fn origin_is_a_rest_point() {
        let hs = [
            Hamiltonian::rigid(0.61),
            Hamiltonian::perturbed(0.61, 0.1, sample_bumps()),
            Hamiltonian::Staged {
                alpha: 0.61,
                stages: vec![Stage {
                    bumps: sample_bumps(),
                }],
            },
        ];
        for h in &hs {
            for t in [0.0, 0.13, 0.5, 0.77] {
                let v = h.vector_field(t, 0.0, 0.0);
                assert_eq!(v, [0.0, 0.0], "{}", h.tag());
            }
        }
    }

    #[test]
    fn zero_epsilon_matches_rigid() {
        let a = Hamiltonian::rigid(0.4);
        let b = Hamiltonian::perturbed(0.4, 0.0, sample_bumps());
        for (x, y) in [(0.1, 0.2), (-0.5, 0.7), (0.9, -0.1)] {
            assert_eq!(a.vector_field(0.3, x, y), b.vector_field(0.3, x, y));
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let d = 1e-5;
        for b in sample_bumps() {
            for (t, x, y) in [(0.1, 0.3, -0.2), (0.6, -0.5, 0.4), (0.9, 0.05, 0.7)] {
                let j = b.jet(t, x, y);
                let gx = (b.jet(t, x + d, y).value - b.jet(t, x - d, y).value) / (2.0 * d);
                let gy = (b.jet(t, x, y + d).value - b.jet(t, x, y - d).value) / (2.0 * d);
                assert!((gx - j.grad[0]).abs() < 1e-8, "{b:?}");
                assert!((gy - j.grad[1]).abs() < 1e-8, "{b:?}");
                let hxx = (b.jet(t, x + d, y).grad[0] - b.jet(t, x - d, y).grad[0]) / (2.0 * d);
                let hxy = (b.jet(t, x, y + d).grad[0] - b.jet(t, x, y - d).grad[0]) / (2.0 * d);
                let hyy = (b.jet(t, x, y + d).grad[1] - b.jet(t, x, y - d).grad[1]) / (2.0 * d);
                assert!((hxx - j.hess[0]).abs() < 1e-7, "{b:?}");
                assert!((hxy - j.hess[1]).abs() < 1e-7, "{b:?}");
                assert!((hyy - j.hess[2]).abs() < 1e-7, "{b:?}");
            }
        }
    }

    #[test]
    fn bumps_vanish_on_the_boundary() {
        for b in sample_bumps() {
            for i in 0..16 {
                let th = i as f64 * 0.4;
                let j = b.jet(0.37, th.cos(), th.sin());
                assert!(j.value.abs() < 1e-14);
                assert!(j.grad[0].abs() < 1e-13 && j.grad[1].abs() < 1e-13);
                assert!(j.hess.iter().all(|h| h.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn low_order_bump_rejected() {
        assert!(Bump::new(0, 1, 0, 0.0, 1.0).validate().is_err());
        assert!(Bump::new(1, 0, 0, 0.0, 1.0).validate().is_ok());
    }

    #[test]
    fn periodic_in_time() {
        let h = Hamiltonian::perturbed(0.3, 0.2, sample_bumps());
        for t in [0.1, 0.45] {
            let a = h.evaluate(t, DiskPoint::new(0.3, 0.4));
            let b = h.evaluate(t + 1.0, DiskPoint::new(0.3, 0.4));
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_negates_and_reverses_time() {
        let h = Hamiltonian::perturbed(0.3, 0.2, sample_bumps());
        let inv = h.inverse();
        let p = DiskPoint::new(0.2, -0.6);
        assert!((inv.evaluate(0.3, p) + h.evaluate(-0.3, p)).abs() < 1e-15);
        assert_eq!(inv.inverse(), h);
        assert_eq!(inv.alpha(), -0.3);
    }
}
