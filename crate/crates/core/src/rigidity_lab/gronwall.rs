//! Nodewise comparison of a Floer row with the Hamiltonian flow through one
//! of its points: `|z(s,t) − φ^t(p)| ≤ A t e^{Bt}`, `A = sup |∂ₛz|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RigidityError;
use crate::floer_solver::{sup_norm_s_derivative, FloerSolution};
use crate::hamiltonian_disk::{advance, DiskPoint, FlowConfig};

const MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallComparison {
    pub row: usize,
    pub start_column: usize,
    pub a: f64,
    pub b: f64,
    /// Elapsed time at each node, `0..=n` in steps of `ht`.
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub violations: usize,
    /// `min (rhs − lhs)` over nodes with `t > 0`.
    pub min_slack: f64,
}

impl GronwallComparison {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    pub fn require_holds(self) -> Result<Self, RigidityError> {
        if self.holds() {
            Ok(self)
        } else {
            Err(RigidityError::GronwallViolation {
                count: self.violations,
                worst: self.min_slack,
            })
        }
    }
}

fn locate(sol: &FloerSolution, p: DiskPoint) -> Result<(usize, usize), RigidityError> {
    let (mut best, mut at) = (f64::INFINITY, (0, 0));
    for i in 0..=sol.grid.ns {
        for j in 0..sol.grid.nt {
            let z = sol.at(i, j);
            let d = (z.re - p.x).hypot(z.im - p.y);
            if d < best {
                best = d;
                at = (i, j);
            }
        }
    }
    if best > MATCH_TOL {
        return Err(RigidityError::ProbeNotInImage {
            x: p.x,
            y: p.y,
            distance: best,
        });
    }
    Ok(at)
}

fn compare_from(
    sol: &FloerSolution,
    row: usize,
    j0: usize,
    a: f64,
    b: f64,
    cfg: &FlowConfig,
) -> Result<GronwallComparison, RigidityError> {
    let g = &sol.grid;
    let h = &sol.hamiltonian;
    let ht = g.ht();
    let t0 = g.t(j0);
    let z0 = sol.at(row, j0);
    let mut q = DiskPoint::new(z0.re, z0.im);
    let mut times = Vec::with_capacity(g.nt + 1);
    let mut lhs = Vec::with_capacity(g.nt + 1);
    let mut rhs = Vec::with_capacity(g.nt + 1);
    for k in 0..=g.nt {
        let t = k as f64 * ht;
        if k > 0 {
            q = advance(h, q, t0 + (k - 1) as f64 * ht, t0 + t, cfg)?;
        }
        let z = sol.at(row, (j0 + k) % g.nt);
        times.push(t);
        lhs.push((z.re - q.x).hypot(z.im - q.y));
        rhs.push(a * t * (b * t).exp());
    }
    let violations = lhs.iter().zip(&rhs).filter(|(l, r)| l > r).count();
    let min_slack = lhs
        .iter()
        .zip(&rhs)
        .skip(1)
        .map(|(l, r)| r - l)
        .fold(f64::INFINITY, f64::min);
    Ok(GronwallComparison {
        row,
        start_column: j0,
        a,
        b,
        times,
        lhs,
        rhs,
        violations,
        min_slack,
    })
}

/// Compares the row of `sol` through the node `p` with the flow started at
/// `p` at that node's time, over one full period `n`.
pub fn gronwall_compare(
    sol: &FloerSolution,
    p: DiskPoint,
    b: f64,
    cfg: &FlowConfig,
) -> Result<GronwallComparison, RigidityError> {
    let (row, j0) = locate(sol, p)?;
    compare_from(sol, row, j0, sup_norm_s_derivative(sol), b, cfg)
}

/// Every row of `sol`, started from `starts` evenly spaced columns.
pub fn gronwall_sweep(
    sol: &FloerSolution,
    b: f64,
    starts: usize,
    cfg: &FlowConfig,
) -> Result<Vec<GronwallComparison>, RigidityError> {
    let a = sup_norm_s_derivative(sol);
    let nt = sol.grid.nt;
    let starts = starts.clamp(1, nt);
    let jobs: Vec<(usize, usize)> = (0..=sol.grid.ns)
        .flat_map(|i| (0..starts).map(move |k| (i, k * nt / starts)))
        .collect();
    jobs.par_iter()
        .map(|&(i, j)| compare_from(sol, i, j, a, b, cfg))
        .collect()
}
