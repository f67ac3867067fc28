//! Sampled invariants: boundary rotation number, Hessian bound, area defect.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{advance, flow, FlowConfig};
use super::{DiskPoint, Hamiltonian, HamiltonianError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub value: f64,
    /// Half-width of the band `value ± 1/n_max`.
    pub band: f64,
    pub n_max: u64,
}

/// Winding average of the boundary orbit of `(1, 0)` over `[0, n_max]`.
pub fn boundary_rotation_number(
    h: &Hamiltonian,
    n_max: u64,
    cfg: &FlowConfig,
) -> Result<RotationEstimate, HamiltonianError> {
    if n_max == 0 {
        return Err(HamiltonianError::InvalidInput(
            "n_max must be positive".into(),
        ));
    }
    let mut p = DiskPoint::new(1.0, 0.0);
    let mut theta = 0.0;
    for k in 0..n_max {
        let tr = flow(h, p, k as f64, k as f64 + 1.0, cfg)?;
        for w in tr.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let cross = a.x * b.y - a.y * b.x;
            let dot = a.x * b.x + a.y * b.y;
            theta += cross.atan2(dot);
            let r = b.norm();
            if (r - 1.0).abs() > cfg.drift_tol {
                return Err(HamiltonianError::IntegrationDrift {
                    time: k as f64,
                    radius: r,
                    tolerance: cfg.drift_tol,
                });
            }
        }
        p = tr.last();
    }
    Ok(RotationEstimate {
        value: theta / (2.0 * PI * n_max as f64),
        band: 1.0 / n_max as f64,
        n_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HessianGrid {
    pub nt: usize,
    pub nr: usize,
    pub ntheta: usize,
}

impl Default for HessianGrid {
    fn default() -> Self {
        Self {
            nt: 32,
            nr: 32,
            ntheta: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianBound {
    /// Upper bound used downstream: `grid_max + inflation`.
    pub b: f64,
    pub grid_max: f64,
    pub inflation: f64,
    /// Difference-quotient estimates of the spectral norm's variation along
    /// t, r and θ (per radian).
    pub lipschitz: [f64; 3],
    pub grid: HessianGrid,
}

fn spectral_norm(h: [f64; 3]) -> f64 {
    let mean = 0.5 * (h[0] + h[2]);
    let dev = (0.5 * (h[0] - h[2])).hypot(h[1]);
    mean.abs() + dev
}

/// Max over a polar `(t, r, θ)` grid of `‖Hess H^t‖`, inflated by half a grid
/// cell times the observed variation rates.
pub fn hessian_bound(h: &Hamiltonian, grid: HessianGrid) -> HessianBound {
    let (nt, nr, na) = (grid.nt.max(1), grid.nr.max(1), grid.ntheta.max(1));
    let dt = 1.0 / nt as f64;
    let dr = 1.0 / nr as f64;
    let da = 2.0 * PI / na as f64;
    let norm_at = |i: usize, j: usize, k: usize| {
        let r = j as f64 * dr;
        let a = k as f64 * da;
        spectral_norm(h.jet(i as f64 * dt, r * a.cos(), r * a.sin()).hess)
    };
    // Per time slice: (max, lip_t, lip_r, lip_theta)
    let slices: Vec<[f64; 4]> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let mut out = [0.0f64; 4];
            for j in 0..=nr {
                for k in 0..na {
                    let v = norm_at(i, j, k);
                    out[0] = out[0].max(v);
                    out[1] = out[1].max((norm_at((i + 1) % nt, j, k) - v).abs() / dt);
                    if j < nr {
                        out[2] = out[2].max((norm_at(i, j + 1, k) - v).abs() / dr);
                    }
                    out[3] = out[3].max((norm_at(i, j, (k + 1) % na) - v).abs() / da);
                }
            }
            out
        })
        .collect();
    let mut acc = [0.0f64; 4];
    for s in &slices {
        for (a, v) in acc.iter_mut().zip(s) {
            *a = a.max(*v);
        }
    }
    let inflation = 0.5 * (acc[1] * dt + acc[2] * dr + acc[3] * da);
    HessianBound {
        b: acc[0] + inflation,
        grid_max: acc[0],
        inflation,
        lipschitz: [acc[1], acc[2], acc[3]],
        grid,
    }
}

/// Max `|det Dφ − 1|` of the time-one map over an interior polar grid, with
/// fourth-order central differences of step `delta`.
pub fn area_preservation_defect(
    h: &Hamiltonian,
    rings: usize,
    per_ring: usize,
    delta: f64,
    cfg: &FlowConfig,
) -> Result<f64, HamiltonianError> {
    let r_max = 1.0 - 3.0 * delta;
    let mut pts = Vec::new();
    for i in 0..=rings {
        let r = r_max * i as f64 / rings.max(1) as f64;
        for k in 0..per_ring {
            pts.push(DiskPoint::polar(
                r,
                2.0 * PI * (k as f64 + 0.5 * i as f64) / per_ring as f64,
            ));
        }
    }
    let defects: Result<Vec<f64>, HamiltonianError> = pts
        .par_iter()
        .map(|p| {
            let phi =
                |dx: f64, dy: f64| advance(h, DiskPoint::new(p.x + dx, p.y + dy), 0.0, 1.0, cfg);
            let d = |e: [f64; 2]| -> Result<[f64; 2], HamiltonianError> {
                let f2 = phi(2.0 * delta * e[0], 2.0 * delta * e[1])?;
                let f1 = phi(delta * e[0], delta * e[1])?;
                let b1 = phi(-delta * e[0], -delta * e[1])?;
                let b2 = phi(-2.0 * delta * e[0], -2.0 * delta * e[1])?;
                let c = 1.0 / (12.0 * delta);
                Ok([
                    c * (-f2.x + 8.0 * f1.x - 8.0 * b1.x + b2.x),
                    c * (-f2.y + 8.0 * f1.y - 8.0 * b1.y + b2.y),
                ])
            };
            let jx = d([1.0, 0.0])?;
            let jy = d([0.0, 1.0])?;
            Ok((jx[0] * jy[1] - jx[1] * jy[0] - 1.0).abs())
        })
        .collect();
    Ok(defects?.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Max over sampled t of the oscillation of `H(t, ·)` on the boundary.
    pub boundary_oscillation: f64,
    /// Max over sampled t of `|∇H(t, 0)|`.
    pub origin_gradient: f64,
    /// Max of `|H(t + 1, p) − H(t, p)|` over samples.
    pub periodicity_defect: f64,
}

impl AssumptionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.boundary_oscillation <= tol
            && self.origin_gradient <= tol
            && self.periodicity_defect <= tol
    }
}

/// Samples the standing assumptions: boundary constancy, origin rest point,
/// 1-periodicity.
pub fn check_standing_assumptions(h: &Hamiltonian, samples: usize) -> AssumptionReport {
    let samples = samples.max(2);
    let mut rep = AssumptionReport {
        boundary_oscillation: 0.0,
        origin_gradient: 0.0,
        periodicity_defect: 0.0,
    };
    for i in 0..samples {
        let t = i as f64 / samples as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..samples {
            let p = DiskPoint::polar(1.0, 2.0 * PI * k as f64 / samples as f64);
            let v = h.evaluate(t, p);
            lo = lo.min(v);
            hi = hi.max(v);
            let q = DiskPoint::polar(0.7 * k as f64 / samples as f64, 1.3 * k as f64);
            rep.periodicity_defect = rep
                .periodicity_defect
                .max((h.evaluate(t + 1.0, q) - h.evaluate(t, q)).abs());
        }
        rep.boundary_oscillation = rep.boundary_oscillation.max(hi - lo);
        let g = h.gradient(t, DiskPoint::ORIGIN);
        rep.origin_gradient = rep.origin_gradient.max(g[0].hypot(g[1]));
    }
    rep
}
