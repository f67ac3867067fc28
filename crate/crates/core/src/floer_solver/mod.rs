//! Floer equation `∂_s z + i(∂_t z − X_{H^t}(z)) = 0` on truncated half-cylinders.

pub mod energy;
pub mod export;
pub mod grid;
pub mod induced;
pub mod solver;

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diophantine::interval::{round_down, round_up};
use crate::diophantine::RatInterval;
use crate::hamiltonian_disk::Hamiltonian;

pub use energy::{
    energy_report, floer_energy, interpolation_bound_check, l2_s_derivative, lift_to_mapping_torus,
    sup_norm_s_derivative, EnergyReport, InterpolationReport, MappingTorusLift,
};
pub use grid::{choose_truncation, CylinderGrid, Truncation};
pub use induced::{filling_check, induced_vector_field, CoverageReport, InducedVectorField};
pub use solver::{solve_floer, SolverConfig};

#[derive(Debug, Error)]
pub enum FloerError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("enclosure of n·α for n = {n} contains an integer; the degree ⌊nα⌋ is undetermined, refine the continued fraction")]
    DegreeUndetermined { n: u32 },
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("no solutions supplied")]
    EmptyFamily,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// `⌊nα⌋` and an outward-rounded enclosure of `{nα}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NAlpha {
    pub n: u32,
    pub degree: i64,
    pub frac_lo: f64,
    pub frac_hi: f64,
}

impl NAlpha {
    pub fn from_enclosure(alpha: &RatInterval, n: u32) -> Result<Self, FloerError> {
        let nn = BigRational::from_integer(BigInt::from(n));
        let lo = alpha.lo() * &nn;
        let hi = alpha.hi() * &nn;
        let k = lo.floor();
        if hi.floor() != k || (hi == hi.floor() && hi != lo) {
            return Err(FloerError::DegreeUndetermined { n });
        }
        let degree = k
            .to_integer()
            .to_i64()
            .ok_or_else(|| FloerError::InvalidInput("degree out of range".into()))?;
        Ok(Self {
            n,
            degree,
            frac_lo: round_down(&(&lo - &k)).max(0.0),
            frac_hi: round_up(&(&hi - &k)).min(1.0),
        })
    }

    /// From a floating-point α, for tests and quick experiments.
    pub fn from_f64(alpha: f64, n: u32) -> Result<Self, FloerError> {
        let r = BigRational::from_float(alpha)
            .ok_or_else(|| FloerError::InvalidInput("alpha is not finite".into()))?;
        Self::from_enclosure(&RatInterval::point(r), n)
    }

    pub fn frac(&self) -> f64 {
        0.5 * (self.frac_lo + self.frac_hi)
    }

    /// Decay rate `2π{nα}/n` of the rigid profile.
    pub fn decay_rate(&self) -> f64 {
        2.0 * PI * self.frac() / self.n as f64
    }
}

/// Discretized `z: [0, S] × ℝ/nℤ → D`, row-major in `(s, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloerSolution {
    pub grid: CylinderGrid,
    pub z: Vec<Complex64>,
    pub boundary_degree: i64,
    /// Periodic part of the boundary angle: `z(0, t_j) = e^{i(2πk t_j/n + φ_j)}`.
    pub boundary_phase: Vec<f64>,
    pub hamiltonian: Hamiltonian,
    pub n_alpha: NAlpha,
    pub residual_norm: f64,
    pub residual_max: f64,
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub penalty_weight: f64,
}

impl FloerSolution {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.z[self.grid.idx(i, j)]
    }

    /// Boundary angle lift `θ_j`.
    pub fn boundary_angle(&self, j: usize) -> f64 {
        2.0 * PI * self.boundary_degree as f64 * self.grid.t(j) / self.grid.n as f64
            + self.boundary_phase[j]
    }

    /// Winding number of `z(0, ·)` computed from the nodes.
    pub fn measured_winding(&self) -> i64 {
        let nt = self.grid.nt;
        let mut total = 0.0;
        for j in 0..nt {
            let a = self.at(0, j);
            let b = self.at(0, (j + 1) % nt);
            total += (b / a).arg();
        }
        (total / (2.0 * PI)).round() as i64
    }

    pub fn require_converged(self) -> Result<Self, FloerError> {
        if self.converged {
            Ok(self)
        } else {
            Err(FloerError::NotConverged {
                residual: self.residual_norm,
                iterations: self.iterations,
            })
        }
    }

    /// Recomputes the boundary row from the phase and refreshes residual norms.
    pub(crate) fn sync(&mut self) {
        for j in 0..self.grid.nt {
            self.z[j] = Complex64::from_polar(1.0, self.boundary_angle(j));
        }
        let r = residual(&self.z, &self.hamiltonian, &self.grid);
        self.residual_norm = r.l2;
        self.residual_max = r.max;
    }

    /// Max `|z|` on the last row.
    pub fn tail_max(&self) -> f64 {
        (0..self.grid.nt)
            .map(|j| self.at(self.grid.ns, j).norm())
            .fold(0.0, f64::max)
    }

    /// Max over nodes of `|z − e^{iψ} w|`, with `ψ` the best phase alignment.
    pub fn max_deviation(&self, other: &FloerSolution) -> f64 {
        max_deviation_aligned(&self.z, &other.z)
    }
}

pub fn max_deviation_aligned(a: &[Complex64], b: &[Complex64]) -> f64 {
    let c: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let rot = if c.norm() > 0.0 {
        c / c.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - rot * y).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub field: Vec<Complex64>,
    /// `(∫∫ |F|²)^{1/2}` by the trapezoid rule.
    pub l2: f64,
    pub max: f64,
}

#[inline]
pub(crate) fn field_c(h: &Hamiltonian, t: f64, z: Complex64) -> Complex64 {
    let v = h.vector_field(t, z.re, z.im);
    Complex64::new(v[0], v[1])
}

/// Nodewise `F(z) = D_s z + i(D_t z − X_{H^t}(z))`.
pub fn residual(z: &[Complex64], h: &Hamiltonian, g: &CylinderGrid) -> Residual {
    assert_eq!(z.len(), g.len(), "field does not match grid");
    let nt = g.nt;
    let mut field = vec![Complex64::new(0.0, 0.0); g.len()];
    field.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            let x = field_c(h, g.t(j), z[g.idx(i, j)]);
            *out = grid::ds(g, z, i, j) + Complex64::i() * (grid::dt(g, z, i, j) - x);
        }
    });
    let l2 = g.integrate(|i, j| field[g.idx(i, j)].norm_sqr()).sqrt();
    let max = field.iter().map(|f| f.norm()).fold(0.0, f64::max);
    Residual { field, l2, max }
}

/// `z(s,t) = e^{−2π{nα}s/n} e^{i(2π⌊nα⌋t/n + θ₀)}`, exact for the rigid Hamiltonian.
pub fn rigid_rotation_exact_solution(
    alpha: &RatInterval,
    n: u32,
    theta0: f64,
    grid: &CylinderGrid,
) -> Result<FloerSolution, FloerError> {
    let na = NAlpha::from_enclosure(alpha, n)?;
    if grid.n != n {
        return Err(FloerError::InvalidInput(
            "grid period differs from n".into(),
        ));
    }
    let alpha_hat = alpha.midpoint().to_f64().unwrap_or(f64::NAN);
    Ok(oracle_on_grid(na, alpha_hat, theta0, grid))
}

pub(crate) fn oracle_on_grid(
    na: NAlpha,
    alpha_hat: f64,
    theta0: f64,
    grid: &CylinderGrid,
) -> FloerSolution {
    let c = na.decay_rate();
    let w = 2.0 * PI * na.degree as f64 / grid.n as f64;
    let mut z = Vec::with_capacity(grid.len());
    for i in 0..=grid.ns {
        let r = (-c * grid.s(i)).exp();
        for j in 0..grid.nt {
            z.push(Complex64::from_polar(r, w * grid.t(j) + theta0));
        }
    }
    let mut sol = FloerSolution {
        grid: *grid,
        z,
        boundary_degree: na.degree,
        boundary_phase: vec![theta0; grid.nt],
        hamiltonian: Hamiltonian::rigid(alpha_hat),
        n_alpha: na,
        residual_norm: 0.0,
        residual_max: 0.0,
        converged: true,
        iterations: 0,
        history: Vec::new(),
        penalty_weight: 0.0,
    };
    sol.sync();
    sol
}
