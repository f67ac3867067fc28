use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::dt;
use super::{field_c, FloerError, FloerSolution};
use crate::hamiltonian_disk::DiskPoint;

/// Samples of `X_n^t(z(s,t)) := ∂_t z(s,t)` at one time slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedVectorField {
    pub t: f64,
    pub samples: Vec<(DiskPoint, [f64; 2])>,
    /// Max of `|X_n^t − X_{H^t}|` over samples.
    pub max_deviation: f64,
    /// Max of `|X_n^t − X_{H^t}| / |z|` over samples away from the origin.
    pub max_relative_deviation: f64,
}

/// Harvests the induced field from the column nearest to `t` in each solution.
pub fn induced_vector_field(
    solutions: &[FloerSolution],
    t: f64,
) -> Result<InducedVectorField, FloerError> {
    if solutions.is_empty() {
        return Err(FloerError::EmptyFamily);
    }
    let mut samples = Vec::new();
    let mut max_dev: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for sol in solutions {
        let g = &sol.grid;
        let tt = t.rem_euclid(g.n as f64);
        let j = ((tt / g.ht()).round() as usize) % g.nt;
        for i in 0..=g.ns {
            let z = sol.at(i, j);
            let v = dt(g, &sol.z, i, j);
            let x = field_c(&sol.hamiltonian, g.t(j), z);
            let d = (v - x).norm();
            max_dev = max_dev.max(d);
            if z.norm() > 1e-12 {
                max_rel = max_rel.max(d / z.norm());
            }
            samples.push((DiskPoint::new(z.re, z.im), [v.re, v.im]));
        }
    }
    Ok(InducedVectorField {
        t,
        samples,
        max_deviation: max_dev,
        max_relative_deviation: max_rel,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeCoverage {
    pub probe: DiskPoint,
    pub distance: f64,
    pub covered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Longest mesh edge of the image grids.
    pub threshold: f64,
    pub probes: Vec<ProbeCoverage>,
    /// Probes at the origin, which is only reached as `s → ∞`.
    pub excluded: Vec<DiskPoint>,
    pub covered_fraction: f64,
}

impl CoverageReport {
    pub fn all_covered(&self) -> bool {
        self.probes.iter().all(|p| p.covered)
    }
}

/// Nearest image node of the family for each probe.
pub fn filling_check(solutions: &[FloerSolution], probes: &[DiskPoint]) -> CoverageReport {
    let mut threshold: f64 = 0.0;
    for sol in solutions {
        let g = &sol.grid;
        for i in 0..=g.ns {
            for j in 0..g.nt {
                let z = sol.at(i, j);
                threshold = threshold.max((sol.at(i, (j + 1) % g.nt) - z).norm());
                if i < g.ns {
                    threshold = threshold.max((sol.at(i + 1, j) - z).norm());
                }
            }
        }
    }
    let (excluded, kept): (Vec<DiskPoint>, Vec<DiskPoint>) =
        probes.iter().partition(|p| p.norm() < 1e-12);
    let out: Vec<ProbeCoverage> = kept
        .par_iter()
        .map(|p| {
            let mut best = f64::INFINITY;
            for sol in solutions {
                for z in &sol.z {
                    best = best.min((z.re - p.x).hypot(z.im - p.y));
                }
            }
            ProbeCoverage {
                probe: *p,
                distance: best,
                covered: best <= threshold,
            }
        })
        .collect();
    let covered = out.iter().filter(|p| p.covered).count();
    let covered_fraction = if out.is_empty() {
        1.0
    } else {
        covered as f64 / out.len() as f64
    };
    CoverageReport {
        threshold,
        probes: out,
        excluded,
        covered_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::ContinuedFraction;
    use crate::floer_solver::{rigid_rotation_exact_solution, CylinderGrid};

    fn family(thetas: &[f64]) -> Vec<FloerSolution> {
        let alpha = ContinuedFraction::golden(40).value_enclosure();
        let g = CylinderGrid::new(5, 40.0, 128, 160).unwrap();
        thetas
            .iter()
            .map(|th| rigid_rotation_exact_solution(&alpha, 5, *th, &g).unwrap())
            .collect()
    }

    #[test]
    fn rigid_deviation_is_the_fractional_rate() {
        let fam = family(&[0.0, 1.0]);
        let f = fam[0].n_alpha.decay_rate();
        for t in [0.0, 0.25, 0.5] {
            let v = induced_vector_field(&fam, t).unwrap();
            assert!(
                (v.max_deviation - f).abs() < 1e-4,
                "{} vs {f}",
                v.max_deviation
            );
        }
        let a = induced_vector_field(&fam, 0.25).unwrap();
        let b = induced_vector_field(&fam, 1.25).unwrap();
        assert!((a.max_deviation - b.max_deviation).abs() < 1e-9);
        assert!(matches!(
            induced_vector_field(&[], 0.0),
            Err(FloerError::EmptyFamily)
        ));
    }

    #[test]
    fn rigid_family_fills_the_annulus() {
        let fam = family(&[0.0, 0.5, 1.0]);
        let r_min = (-fam[0].n_alpha.decay_rate() * fam[0].grid.s_max).exp();
        let mut probes = vec![DiskPoint::ORIGIN];
        for k in 0..40 {
            let r = r_min + (1.0 - r_min) * k as f64 / 39.0;
            probes.push(DiskPoint::polar(r, 0.37 * k as f64));
        }
        let rep = filling_check(&fam, &probes);
        assert_eq!(rep.excluded.len(), 1);
        assert!(
            rep.all_covered(),
            "{:?}",
            rep.probes.iter().find(|p| !p.covered)
        );
        assert_eq!(rep.probes.len(), 40);
    }
}
