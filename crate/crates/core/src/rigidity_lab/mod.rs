//! End-to-end experiments: C⁰ distances along rigidity times, the bound
//! chain `M {nα}^{1/4} n e^{Bn}`, Gronwall comparisons and a mixing probe.

pub mod experiment;
pub mod gronwall;
pub mod mixing;

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis_checks::AnalysisError;
use crate::diophantine::interval::log10_approx;
use crate::diophantine::DiophantineError;
use crate::floer_solver::FloerError;
use crate::hamiltonian_disk::{advance, DiskPoint, FlowConfig, Hamiltonian, HamiltonianError};

pub use experiment::{
    run_rigidity_experiment, AlphaSpec, FamilySpec, FloerStage, RigidityConfig, RigidityReport,
    RigidityRow, SobolevStage,
};
pub use gronwall::{gronwall_compare, gronwall_sweep, GronwallComparison};
pub use mixing::{
    mixing_probe, opposite_half_annuli, separation, MixingProbe, MixingRow, Region, Sector,
};

#[derive(Debug, Error)]
pub enum RigidityError {
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
    #[error(transparent)]
    Floer(#[from] FloerError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("probe ({x}, {y}) is not a node of the solution image (nearest at {distance:e})")]
    ProbeNotInImage { x: f64, y: f64, distance: f64 },
    #[error("Gronwall inequality violated at {count} nodes (worst slack {worst:e})")]
    GronwallViolation { count: usize, worst: f64 },
    #[error("configuration: {0}")]
    Config(String),
}

/// Polar probes: rings at spacing `h` (plus the boundary circle), each with
/// arc spacing at most `h`, and the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeGrid {
    pub h: f64,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self { h: 1e-2 }
    }
}

impl ProbeGrid {
    pub fn points(&self) -> Vec<DiskPoint> {
        let rings = (1.0 / self.h).ceil().max(1.0) as usize;
        let mut out = vec![DiskPoint::ORIGIN];
        for k in 1..=rings {
            let r = k as f64 / rings as f64;
            let m = ((2.0 * PI * r / self.h).ceil() as usize).max(6);
            for a in 0..m {
                out.push(DiskPoint::polar(r, 2.0 * PI * a as f64 / m as f64));
            }
        }
        out
    }

    /// Largest distance from a disk point to the nearest probe.
    pub fn covering_radius(&self) -> f64 {
        let rings = (1.0 / self.h).ceil().max(1.0);
        let dr = 1.0 / rings;
        (0.5 * dr).hypot(0.5 * self.h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Distance {
    pub n: u64,
    /// Max over probes of `|φⁿ(p) − p|`.
    pub measured: f64,
    pub worst_probe: DiskPoint,
    /// `(e^{Bn} + 1)·ρ` with `ρ` the covering radius; often vacuous.
    pub inflation: f64,
}

/// `d_C⁰(φⁿ, id)` on the probe grid for every `n` in `ns`, iterating each
/// probe once up to the largest `n`.
pub fn c0_distances(
    h: &Hamiltonian,
    ns: &[u64],
    grid: &ProbeGrid,
    hessian_b: f64,
    cfg: &FlowConfig,
) -> Result<Vec<C0Distance>, RigidityError> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let probes = grid.points();
    // Per probe, displacement at each requested n.
    let per_probe: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|p| -> Result<Vec<f64>, HamiltonianError> {
            let mut at = vec![0.0; ns.len()];
            let mut q = *p;
            for k in 0..=max_n {
                if k > 0 {
                    q = advance(h, q, (k - 1) as f64, k as f64, cfg)?;
                }
                for (slot, n) in at.iter_mut().zip(ns) {
                    if *n == k {
                        *slot = q.dist(p);
                    }
                }
            }
            Ok(at)
        })
        .collect::<Result<_, _>>()?;
    let rho = grid.covering_radius();
    Ok(ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let (k, measured) = per_probe
                .iter()
                .enumerate()
                .map(|(k, v)| (k, v[i]))
                .fold((0, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
            C0Distance {
                n,
                measured,
                worst_probe: probes[k],
                inflation: ((hessian_b * n as f64).exp() + 1.0) * rho,
            }
        })
        .collect())
}

pub fn c0_distance_to_identity(
    h: &Hamiltonian,
    n: u64,
    grid: &ProbeGrid,
    hessian_b: f64,
    cfg: &FlowConfig,
) -> Result<C0Distance, RigidityError> {
    Ok(c0_distances(h, &[n], grid, hessian_b, cfg)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    /// Natural log of the bound; `-∞` when `{nα} = 0`.
    pub ln_value: f64,
    pub value: f64,
    /// The bound exceeds the disk diameter 2.
    pub vacuous: bool,
}

/// `M·{nα}^{1/4}·n·e^{Bn}` from the upper end of the `{nα}` enclosure,
/// evaluated on the log scale so tiny fractional parts do not underflow.
pub fn theoretical_bound(m: f64, b: f64, frac_upper: &BigRational, n: u64) -> BoundValue {
    assert!(m >= 0.0 && b >= 0.0, "constants must be non-negative");
    if frac_upper.is_zero() || m == 0.0 || n == 0 || !frac_upper.is_positive() {
        return BoundValue {
            ln_value: f64::NEG_INFINITY,
            value: 0.0,
            vacuous: false,
        };
    }
    let ln_frac = log10_approx(frac_upper) * std::f64::consts::LN_10;
    let ln_value = m.ln() + 0.25 * ln_frac + (n as f64).ln() + b * n as f64;
    let value = ln_value.exp();
    BoundValue {
        ln_value,
        value,
        vacuous: ln_value > 2f64.ln(),
    }
}

/// The bound after substituting `{nα} ≤ n e^{−jn}`, on the log scale.
pub fn ln_bound_along_sequence(m: f64, b: f64, n: u64, j: u64) -> f64 {
    let nf = n as f64;
    m.ln() + 0.25 * (nf.ln() - j as f64 * nf) + nf.ln() + b * nf
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn bound_examples() {
        let f = BigRational::new(BigInt::from(1), BigInt::from(100_000_000));
        let v = theoretical_bound(1.0, 1.0, &f, 2);
        assert!((v.value - 2.0 * 1f64.exp().powi(2) * 1e-2).abs() < 1e-12);
        assert!((v.value - 0.1478).abs() < 1e-4);
        assert!(!v.vacuous);
        assert_eq!(
            theoretical_bound(1.0, 1.0, &BigRational::zero(), 2).value,
            0.0
        );
        let big = theoretical_bound(5.0, 3.0, &BigRational::new(1.into(), 2.into()), 10);
        assert!(big.vacuous);
    }

    #[test]
    fn sequence_bound_decays_in_j() {
        let b = 1.0;
        let n = 8;
        let l: Vec<f64> = (1..6)
            .map(|j| ln_bound_along_sequence(2.0, b, n, j))
            .collect();
        assert!(l.windows(2).all(|w| w[1] < w[0]));
        // For j > 4B the exponent is negative and decays as n grows.
        assert!(ln_bound_along_sequence(1.0, b, 200, 8) < ln_bound_along_sequence(1.0, b, 100, 8));
    }

    #[test]
    fn probe_grid_reaches_boundary() {
        let g = ProbeGrid { h: 0.1 };
        let pts = g.points();
        assert!(pts.iter().any(|p| (p.norm() - 1.0).abs() < 1e-15));
        assert!(pts.iter().all(|p| p.norm() <= 1.0 + 1e-15));
        assert!(g.covering_radius() < 0.1);
    }

    #[test]
    fn rigid_distance_is_the_chord() {
        let alpha = 0.618_033_988_749_894_9;
        let h = Hamiltonian::rigid(alpha);
        let ns = [0, 1, 2, 5, 13];
        let d = c0_distances(
            &h,
            &ns,
            &ProbeGrid { h: 0.2 },
            2.0 * PI * alpha,
            &FlowConfig::default(),
        )
        .unwrap();
        for (row, n) in d.iter().zip(ns) {
            let chord = 2.0 * (PI * n as f64 * alpha).sin().abs();
            assert!((row.measured - chord).abs() < 1e-9, "n={n}");
            assert!(row.measured <= 2.0);
        }
        assert_eq!(d[0].measured, 0.0);
    }
}
