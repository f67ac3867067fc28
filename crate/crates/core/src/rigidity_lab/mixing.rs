//! Two-set mixing probe: Monte Carlo estimates of `μ(φ⁻ⁿ(A) ∩ B)` with `μ`
//! normalized Lebesgue measure on the disk.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RigidityError;
use crate::hamiltonian_disk::{advance, DiskPoint, FlowConfig, Hamiltonian};

const CHUNK: usize = 1024;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// `{(r, θ) : r0 ≤ r ≤ r1, θ ∈ [θ0, θ1] mod 2π}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub r0: f64,
    pub r1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl Sector {
    pub fn new(r0: f64, r1: f64, theta0: f64, theta1: f64) -> Result<Self, RigidityError> {
        let s = Self {
            r0,
            r1,
            theta0,
            theta1,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), RigidityError> {
        let ok = (0.0..1.0).contains(&self.r0)
            && self.r1 > self.r0
            && self.r1 <= 1.0
            && self.theta1 > self.theta0
            && self.theta1 - self.theta0 <= TAU;
        if ok {
            Ok(())
        } else {
            Err(RigidityError::Config(format!("invalid sector {self:?}")))
        }
    }

    /// Normalized measure (`μ(D) = 1`).
    pub fn measure(&self) -> f64 {
        (self.theta1 - self.theta0) * (self.r1 * self.r1 - self.r0 * self.r0) / TAU
    }

    pub fn contains(&self, p: DiskPoint) -> bool {
        let r = p.norm();
        if r < self.r0 || r > self.r1 {
            return false;
        }
        let d = (p.y.atan2(p.x) - self.theta0).rem_euclid(TAU);
        d <= self.theta1 - self.theta0 || (self.theta1 - self.theta0 - TAU).abs() < 1e-15
    }

    /// Area-uniform point from `(u, v) ∈ [0,1)²`.
    fn point(&self, u: f64, v: f64) -> DiskPoint {
        let r2 = self.r0 * self.r0 + u * (self.r1 * self.r1 - self.r0 * self.r0);
        DiskPoint::polar(r2.sqrt(), self.theta0 + v * (self.theta1 - self.theta0))
    }

    fn boundary(&self, spacing: f64) -> Vec<DiskPoint> {
        let mut out = Vec::new();
        let dth = self.theta1 - self.theta0;
        for r in [self.r0, self.r1] {
            let m = ((r * dth / spacing).ceil() as usize).max(1);
            out.extend(
                (0..=m).map(|k| DiskPoint::polar(r, self.theta0 + dth * k as f64 / m as f64)),
            );
        }
        let m = (((self.r1 - self.r0) / spacing).ceil() as usize).max(1);
        for th in [self.theta0, self.theta1] {
            out.extend((0..=m).map(|k| {
                DiskPoint::polar(self.r0 + (self.r1 - self.r0) * k as f64 / m as f64, th)
            }));
        }
        out
    }
}

/// Finite union of non-overlapping sectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub sectors: Vec<Sector>,
}

impl Region {
    pub fn new(sectors: Vec<Sector>) -> Result<Self, RigidityError> {
        if sectors.is_empty() {
            return Err(RigidityError::Config("region has no sectors".into()));
        }
        for s in &sectors {
            s.validate()?;
        }
        Ok(Self { sectors })
    }

    pub fn sector(r0: f64, r1: f64, theta0: f64, theta1: f64) -> Result<Self, RigidityError> {
        Self::new(vec![Sector::new(r0, r1, theta0, theta1)?])
    }

    pub fn measure(&self) -> f64 {
        self.sectors.iter().map(Sector::measure).sum()
    }

    pub fn contains(&self, p: DiskPoint) -> bool {
        self.sectors.iter().any(|s| s.contains(p))
    }

    fn boundary(&self, spacing: f64) -> Vec<DiskPoint> {
        self.sectors
            .iter()
            .flat_map(|s| s.boundary(spacing))
            .collect()
    }
}

/// Distance between two disjoint regions, from boundary samples at spacing
/// `1e-3`, minus that spacing so the value is a lower bound.
pub fn separation(a: &Region, b: &Region) -> f64 {
    const SPACING: f64 = 1e-3;
    let pa = a.boundary(SPACING);
    let pb = b.boundary(SPACING);
    let min = pa
        .par_iter()
        .map(|p| pb.iter().map(|q| p.dist(q)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    (min - SPACING).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingRow {
    pub n: u64,
    pub hits: u64,
    pub samples: u64,
    /// `μ(A) · hits / samples`.
    pub estimate: f64,
    /// Wilson 95% half-width, scaled by `μ(A)`.
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingProbe {
    pub a: Region,
    pub b: Region,
    pub mu_a: f64,
    pub mu_b: f64,
    pub product: f64,
    pub separation: f64,
    pub seed: u64,
    pub rows: Vec<MixingRow>,
}

fn wilson_half_width(hits: u64, n: u64) -> f64 {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

/// Stratified sample `k` of `samples` over `region`: sectors get samples in
/// proportion to measure, each sector is cut into a square grid of cells in
/// `(r², θ)` and cells are filled round-robin with jittered points.
fn stratified_points(region: &Region, samples: usize, seed: u64) -> Vec<DiskPoint> {
    let total = region.measure();
    let mut counts: Vec<usize> = region
        .sectors
        .iter()
        .map(|s| (samples as f64 * s.measure() / total).floor() as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    counts[0] += samples - assigned;
    let mut plan = Vec::with_capacity(samples);
    for (s, &c) in region.sectors.iter().zip(&counts) {
        let m = ((c as f64).sqrt().floor() as usize).max(1);
        plan.extend((0..c).map(|k| (s, m, k % (m * m))));
    }
    plan.par_chunks(CHUNK)
        .enumerate()
        .flat_map_iter(|(chunk, items)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            items
                .iter()
                .map(|&(s, m, cell)| {
                    let (cu, cv) = (cell / m, cell % m);
                    let u = (cu as f64 + rng.gen::<f64>()) / m as f64;
                    let v = (cv as f64 + rng.gen::<f64>()) / m as f64;
                    s.point(u, v)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// For each `n` in `n_list`, the fraction of stratified samples `y ∈ A` with
/// `φ⁻ⁿ(y) ∈ B`, times `μ(A)`. Each sample is pulled back once up to the
/// largest `n`.
pub fn mixing_probe(
    h: &Hamiltonian,
    a: &Region,
    b: &Region,
    n_list: &[u64],
    samples: usize,
    seed: u64,
    cfg: &FlowConfig,
) -> Result<MixingProbe, RigidityError> {
    if samples == 0 {
        return Err(RigidityError::Config(
            "mixing probe needs samples > 0".into(),
        ));
    }
    let max_n = n_list.iter().copied().max().unwrap_or(0);
    let points = stratified_points(a, samples, seed);
    let hits_per_point: Vec<Vec<bool>> = points
        .par_iter()
        .map(|&p| -> Result<Vec<bool>, RigidityError> {
            let mut inside = vec![false; n_list.len()];
            let mut q = p;
            for k in 0..=max_n {
                if k > 0 {
                    q = advance(h, q, -((k - 1) as f64), -(k as f64), cfg)?;
                }
                for (slot, &n) in inside.iter_mut().zip(n_list) {
                    if n == k {
                        *slot = b.contains(q);
                    }
                }
            }
            Ok(inside)
        })
        .collect::<Result<_, _>>()?;
    let mu_a = a.measure();
    let mu_b = b.measure();
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let hits = hits_per_point.iter().filter(|v| v[i]).count() as u64;
            let s = samples as u64;
            MixingRow {
                n,
                hits,
                samples: s,
                estimate: mu_a * hits as f64 / s as f64,
                half_width: mu_a * wilson_half_width(hits, s),
            }
        })
        .collect();
    Ok(MixingProbe {
        a: a.clone(),
        b: b.clone(),
        mu_a,
        mu_b,
        product: mu_a * mu_b,
        separation: separation(a, b),
        seed,
        rows,
    })
}

/// Opposite half-annuli `r ∈ [r0, 1]` above and below the x-axis, trimmed
/// symmetrically so their distance is `gap`.
pub fn opposite_half_annuli(r0: f64, gap: f64) -> Result<(Region, Region), RigidityError> {
    if !(r0 > 0.0 && gap > 0.0 && gap < 2.0 * r0) {
        return Err(RigidityError::Config(format!(
            "bad half-annuli r0={r0} gap={gap}"
        )));
    }
    let d = (gap / (2.0 * r0)).asin();
    Ok((
        Region::sector(r0, 1.0, d, PI - d)?,
        Region::sector(r0, 1.0, PI + d, TAU - d)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_and_membership() {
        let s = Sector::new(0.5, 1.0, 0.0, PI).unwrap();
        assert!((s.measure() - 0.375).abs() < 1e-15);
        assert!(s.contains(DiskPoint::polar(0.7, 1.0)));
        assert!(!s.contains(DiskPoint::polar(0.7, -1.0)));
        assert!(!s.contains(DiskPoint::polar(0.3, 1.0)));
        let wrap = Sector::new(0.0, 1.0, 5.0, 7.0).unwrap();
        assert!(wrap.contains(DiskPoint::polar(0.5, 0.2)));
        assert!(Sector::new(0.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn stratified_samples_lie_in_region() {
        let r = Region::new(vec![
            Sector::new(0.2, 0.6, 0.0, 1.0).unwrap(),
            Sector::new(0.7, 1.0, 3.0, 4.0).unwrap(),
        ])
        .unwrap();
        let pts = stratified_points(&r, 5000, 3);
        assert_eq!(pts.len(), 5000);
        assert!(pts.iter().all(|p| r.contains(*p)));
        assert_eq!(pts, stratified_points(&r, 5000, 3));
    }

    #[test]
    fn same_set_at_time_zero_gives_its_measure() {
        let a = Region::sector(0.0, 1.0, 0.0, 2.0).unwrap();
        let h = Hamiltonian::rigid(0.3);
        let m = mixing_probe(&h, &a, &a, &[0], 2000, 1, &FlowConfig::default()).unwrap();
        assert_eq!(m.rows[0].hits, 2000);
        assert!((m.rows[0].estimate - a.measure()).abs() < 1e-15);
    }

    #[test]
    fn small_rotation_cannot_bridge_the_gap() {
        let (a, b) = opposite_half_annuli(0.4, 0.2).unwrap();
        assert!((separation(&a, &b) - 0.2).abs() < 2e-3);
        let alpha = 0.618_033_988_749_894_9;
        let h = Hamiltonian::rigid(alpha);
        // 2|sin(π n α)| at n = 5 is 0.55; at n = 55 and 89 it is below 0.2.
        let cfg = FlowConfig {
            step: 0.05,
            ..FlowConfig::default()
        };
        let m = mixing_probe(&h, &a, &b, &[55, 89], 2000, 9, &cfg).unwrap();
        for row in &m.rows {
            assert!(2.0 * (PI * row.n as f64 * alpha).sin().abs() < m.separation);
            assert_eq!(row.hits, 0, "n={}", row.n);
            assert!(row.half_width > 0.0);
        }
        assert!(m.product > 0.05);
    }
}
