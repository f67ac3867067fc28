//! Interpolation ratios `‖f‖²_∞ / (‖f‖_{L²} ‖f‖_{W^{1,∞}})` of separable probes.
//!
//! Probes are `A·S(x)·T(y)` with `S` a sum of cubic B-splines and `T` either a
//! spline (plane) or `cos^{2K}(πu/n)(1 + β cos(2πνu/n))` (cylinder of period n),
//! so supports are exact and derivatives analytic. `W^{1,∞}` is
//! `‖f‖_∞ + ‖Df‖_∞`.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// `√12`, the planar constant.
pub const PLANE_BOUND: f64 = 3.464_101_615_137_754_6;
/// `6√12`, the cylinder constant obtained through the cut-off reduction.
pub const CYLINDER_BOUND: f64 = 20.784_609_690_826_528;

/// Base samples per feature width; sup norms use 4× that.
const SAMPLES_PER_WIDTH: f64 = 16.0;
const OVERSAMPLE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Plane,
    HalfPlane,
    Cylinder { n: u32 },
    HalfCylinder { n: u32 },
}

impl Domain {
    pub fn period(&self) -> Option<u32> {
        match self {
            Domain::Cylinder { n } | Domain::HalfCylinder { n } => Some(*n),
            _ => None,
        }
    }

    pub fn is_half(&self) -> bool {
        matches!(self, Domain::HalfPlane | Domain::HalfCylinder { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `Σ c_k B((x − center − o_k)/width)` with `B` the cubic B-spline on `[−2, 2]`.
    Spline {
        center: f64,
        width: f64,
        terms: Vec<(f64, f64)>,
    },
    /// `cos^{2K}(πu/n)(1 + β cos(2πνu/n))`, `u = y − y0`, period `n`.
    Trig {
        n: u32,
        y0: f64,
        power: u32,
        beta: f64,
        nu: u32,
    },
}

fn bspline(u: f64) -> (f64, f64) {
    let a = u.abs();
    if a < 1.0 {
        (2.0 / 3.0 - u * u + 0.5 * a * a * a, -2.0 * u + 1.5 * u * a)
    } else if a < 2.0 {
        let r = 2.0 - a;
        (r * r * r / 6.0, -u.signum() * 0.5 * r * r)
    } else {
        (0.0, 0.0)
    }
}

impl Profile {
    pub fn eval(&self, y: f64) -> (f64, f64) {
        match self {
            Profile::Spline {
                center,
                width,
                terms,
            } => {
                let mut v = 0.0;
                let mut d = 0.0;
                for (o, c) in terms {
                    let (b, db) = bspline((y - center - o) / width);
                    v += c * b;
                    d += c * db / width;
                }
                (v, d)
            }
            Profile::Trig {
                n,
                y0,
                power,
                beta,
                nu,
            } => {
                let n = *n as f64;
                let u = y - y0;
                let (s, c) = (PI * u / n).sin_cos();
                let k = 2 * *power as i32;
                let ck = c.powi(k);
                let w = 2.0 * PI * *nu as f64 / n;
                let m = 1.0 + beta * (w * u).cos();
                let dm = -beta * w * (w * u).sin();
                let dck = -(k as f64) * c.powi(k - 1) * s * PI / n;
                (ck * m, dck * m + ck * dm)
            }
        }
    }

    /// Interval carrying all mass, and the smallest feature length.
    fn extent(&self) -> (f64, f64, f64) {
        match self {
            Profile::Spline {
                center,
                width,
                terms,
            } => {
                let lo = terms
                    .iter()
                    .map(|(o, _)| o)
                    .fold(f64::INFINITY, |a, b| a.min(*b));
                let hi = terms
                    .iter()
                    .map(|(o, _)| o)
                    .fold(f64::NEG_INFINITY, |a, b| a.max(*b));
                (center + lo - 2.0 * width, center + hi + 2.0 * width, *width)
            }
            Profile::Trig {
                n, y0, power, nu, ..
            } => {
                let n = *n as f64;
                let sigma = n / (PI * (2.0 * *power as f64).sqrt());
                let feature = if *nu > 0 {
                    sigma.min(n / (4.0 * *nu as f64))
                } else {
                    sigma
                };
                let half = (12.0 * sigma).min(0.5 * n);
                (y0 - half, y0 + half, feature)
            }
        }
    }

    fn is_periodic_window(&self) -> bool {
        match self {
            Profile::Trig { n, power, .. } => {
                let sigma = *n as f64 / (PI * (2.0 * *power as f64).sqrt());
                12.0 * sigma >= 0.5 * *n as f64
            }
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeNorms {
    pub l2: f64,
    pub linf: f64,
    pub grad_inf: f64,
    pub w1_inf: f64,
}

struct Samples {
    v: Vec<f64>,
    d: Vec<f64>,
    h: f64,
}

fn sample(p: &Profile, lo: f64, hi: f64, h: f64, periodic: bool) -> Samples {
    let len = hi - lo;
    let (count, h) = if periodic {
        let c = (len / h).ceil().max(1.0) as usize;
        (c, len / c as f64)
    } else {
        let c = (len / h).ceil().max(1.0) as usize;
        (c + 1, len / c as f64)
    };
    let (v, d) = (0..count).map(|k| p.eval(lo + k as f64 * h)).unzip();
    Samples { v, d, h }
}

/// Upper hull vertices of `{(u_k, w_k)}`, enough to evaluate
/// `max_k (p u_k + q w_k)` for `q ≥ 0`.
fn support_points(u: &[f64], w: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = u.iter().copied().zip(w.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn norms_of(sx: &Samples, sy: &Samples, amplitude: f64) -> ProbeNorms {
    let a = amplitude.abs();
    let l2x: f64 = sx.v.iter().map(|v| v * v).sum::<f64>() * sx.h;
    let l2y: f64 = sy.v.iter().map(|v| v * v).sum::<f64>() * sy.h;
    let mx = sx.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let my = sy.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ty2: Vec<f64> = sy.v.iter().map(|v| v * v).collect();
    let dty2: Vec<f64> = sy.d.iter().map(|v| v * v).collect();
    let hull = support_points(&ty2, &dty2);
    let g2 =
        sx.v.par_iter()
            .zip(&sx.d)
            .map(|(s, ds)| {
                let (p, q) = (ds * ds, s * s);
                hull.iter().fold(0.0f64, |m, (u, w)| m.max(p * u + q * w))
            })
            .reduce(|| 0.0, f64::max);
    let linf = a * mx * my;
    let grad_inf = a * g2.sqrt();
    ProbeNorms {
        l2: a * (l2x * l2y).sqrt(),
        linf,
        grad_inf,
        w1_inf: linf + grad_inf,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevProbe {
    pub domain: Domain,
    pub s_profile: Profile,
    pub t_profile: Profile,
    pub amplitude: f64,
    pub norms: ProbeNorms,
    /// `‖f‖²_∞ / (‖f‖_{L²} ‖f‖_{W^{1,∞}})`.
    pub ratio: f64,
    /// `‖f‖²_∞ / (‖f‖_{L²} ‖Df‖_∞)`.
    pub gradient_ratio: f64,
}

impl SobolevProbe {
    pub fn new(
        domain: Domain,
        s_profile: Profile,
        t_profile: Profile,
        amplitude: f64,
    ) -> Result<Self, AnalysisError> {
        match (&domain, &t_profile) {
            (Domain::Cylinder { n } | Domain::HalfCylinder { n }, Profile::Trig { n: m, .. })
                if n == m => {}
            (Domain::Plane | Domain::HalfPlane, Profile::Spline { .. }) => {}
            _ => {
                return Err(AnalysisError::InvalidInput(
                    "t profile does not fit the domain".into(),
                ))
            }
        }
        if !matches!(s_profile, Profile::Spline { .. }) {
            return Err(AnalysisError::InvalidInput(
                "s profile must be a spline".into(),
            ));
        }
        let norms = compute_norms(&domain, &s_profile, &t_profile, amplitude, 1.0)?;
        Ok(Self {
            domain,
            s_profile,
            t_profile,
            amplitude,
            ratio: norms.linf * norms.linf / (norms.l2 * norms.w1_inf),
            gradient_ratio: norms.linf * norms.linf / (norms.l2 * norms.grad_inf),
            norms,
        })
    }

    /// Random probe; identical draws for every period `n` give the same
    /// physical widths.
    pub fn random<R: Rng>(domain: Domain, rng: &mut R) -> Result<Self, AnalysisError> {
        let s_profile = random_spline(rng, domain.is_half());
        let t_profile = match domain.period() {
            Some(n) => {
                let sigma = (rng.gen_range(0.03f64.ln()..0.12f64.ln())).exp();
                let nf = n as f64;
                let power = ((nf * nf) / (2.0 * PI * PI * sigma * sigma))
                    .round()
                    .max(1.0) as u32;
                let y0 = rng.gen_range(0.0..1.0) * nf;
                let beta = rng.gen_range(0.0..0.6);
                let xi: f64 = rng.gen_range(0.0..0.3);
                let nu = (nf * xi / sigma).round() as u32;
                Profile::Trig {
                    n,
                    y0,
                    power,
                    beta,
                    nu,
                }
            }
            None => random_spline(rng, false),
        };
        Self::new(domain, s_profile, t_profile, 1.0)
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self, AnalysisError> {
        Self::new(
            self.domain,
            self.s_profile.clone(),
            self.t_profile.clone(),
            self.amplitude * lambda,
        )
    }

    /// Largest relative change of the norms when the sampling is refined 2×.
    pub fn refinement_change(&self) -> Result<f64, AnalysisError> {
        let fine = compute_norms(
            &self.domain,
            &self.s_profile,
            &self.t_profile,
            self.amplitude,
            2.0,
        )?;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        Ok(rel(self.norms.l2, fine.l2)
            .max(rel(self.norms.linf, fine.linf))
            .max(rel(self.norms.grad_inf, fine.grad_inf)))
    }
}

fn random_spline<R: Rng>(rng: &mut R, half: bool) -> Profile {
    let width = (rng.gen_range(0.05f64.ln()..0.5f64.ln())).exp();
    let count = rng.gen_range(1..=3);
    let terms = (0..count)
        .map(|_| {
            let sign = if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
            (
                rng.gen_range(-1.5..1.5) * width,
                sign * rng.gen_range(0.2..1.0),
            )
        })
        .collect();
    let center = if half {
        rng.gen_range(-1.0..2.0) * width
    } else {
        0.0
    };
    Profile::Spline {
        center,
        width,
        terms,
    }
}

fn compute_norms(
    domain: &Domain,
    s: &Profile,
    t: &Profile,
    amplitude: f64,
    refine: f64,
) -> Result<ProbeNorms, AnalysisError> {
    let (mut slo, shi, sw) = s.extent();
    if domain.is_half() {
        slo = slo.max(0.0);
    }
    if shi <= slo {
        return Err(AnalysisError::Degenerate);
    }
    let (tlo, thi, tw) = t.extent();
    let step = |w: f64| w / (SAMPLES_PER_WIDTH * OVERSAMPLE * refine);
    let sx = sample(s, slo, shi, step(sw), false);
    let sy = sample(t, tlo, thi, step(tw), t.is_periodic_window());
    let norms = norms_of(&sx, &sy, amplitude);
    if !(norms.linf > 0.0) || !(norms.l2 > 0.0) {
        return Err(AnalysisError::Degenerate);
    }
    Ok(norms)
}

/// Ratio, plus the gradient-only ratio on planar domains.
pub fn sobolev_ratio(probe: &SobolevProbe) -> (f64, Option<f64>) {
    let planar = match probe.domain {
        Domain::Plane | Domain::HalfPlane => Some(probe.gradient_ratio),
        _ => None,
    };
    (probe.ratio, planar)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevRow {
    pub n: u32,
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub worst_trial: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevTable {
    pub half: bool,
    pub rows: Vec<SobolevRow>,
    pub bound: f64,
    pub all_below_bound: bool,
    /// `(max − min)/max` over the per-n maxima.
    pub spread: f64,
    /// Per-n maxima grow by more than 10% from the first to the last n.
    pub trend_up: bool,
    /// Largest observed ratio times 1.5; empirical.
    pub c_empirical: f64,
}

impl SobolevTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,trials,max_ratio,mean_ratio,worst_trial,bound")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.17e},{:.17e},{},{:.17e}",
                r.n, r.trials, r.max_ratio, r.mean_ratio, r.worst_trial, self.bound
            )?;
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ trial as u64)
}

/// Worst ratios of random probes on cylinders (or half-cylinders) per period.
pub fn estimate_sobolev_constant(
    half: bool,
    n_list: &[u32],
    trials: usize,
    seed: u64,
) -> Result<SobolevTable, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::InvalidInput(
            "trials must be at least 1".into(),
        ));
    }
    if n_list.iter().any(|n| *n == 0) {
        return Err(AnalysisError::InvalidInput(
            "periods must be positive".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let domain = if half {
            Domain::HalfCylinder { n }
        } else {
            Domain::Cylinder { n }
        };
        let ratios: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|k| {
                // Half-domain draws can miss [0, ∞); redraw deterministically.
                let mut rng = trial_rng(seed, k);
                loop {
                    if let Ok(p) = SobolevProbe::random(domain, &mut rng) {
                        return p.ratio;
                    }
                }
            })
            .collect();
        let (worst_trial, max_ratio) = ratios
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        rows.push(SobolevRow {
            n,
            trials,
            max_ratio,
            mean_ratio: ratios.iter().sum::<f64>() / trials as f64,
            worst_trial,
        });
    }
    let maxima: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    let hi = maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let trend_up = maxima.len() >= 2 && maxima[maxima.len() - 1] > 1.1 * maxima[0];
    Ok(SobolevTable {
        half,
        all_below_bound: hi <= CYLINDER_BOUND,
        spread: if hi > 0.0 { (hi - lo) / hi } else { 0.0 },
        trend_up,
        c_empirical: 1.5 * hi,
        bound: CYLINDER_BOUND,
        rows,
    })
}

/// Norms along the cut-off reduction from a cylinder probe to the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffChain {
    /// `g = χ f̄` with `χ = 1` on `[0, n]`, support in `(−1, n + 1)`, `|χ'| ≤ 3/2`.
    pub planar: ProbeNorms,
    pub planar_ratio: f64,
    pub cylinder_ratio: f64,
    /// `cylinder_ratio ≤ 6·planar_ratio`.
    pub holds: bool,
    pub planar_below_bound: bool,
}

fn cutoff(y: f64, n: f64) -> (f64, f64) {
    let step = |u: f64| (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u));
    if y <= -1.0 || y >= n + 1.0 {
        (0.0, 0.0)
    } else if y < 0.0 {
        step(y + 1.0)
    } else if y > n {
        let (v, d) = step(n + 1.0 - y);
        (v, -d)
    } else {
        (1.0, 0.0)
    }
}

pub fn cutoff_chain(probe: &SobolevProbe) -> Result<CutoffChain, AnalysisError> {
    let n = probe.domain.period().ok_or_else(|| {
        AnalysisError::InvalidInput("cut-off reduction needs a cylinder probe".into())
    })? as f64;
    let (mut slo, shi, sw) = probe.s_profile.extent();
    if probe.domain.is_half() {
        slo = slo.max(0.0);
    }
    let (_, _, tw) = probe.t_profile.extent();
    let h = |w: f64| w / (SAMPLES_PER_WIDTH * OVERSAMPLE);
    let sx = sample(&probe.s_profile, slo, shi, h(sw), false);
    let count = ((n + 2.0) / h(tw.min(0.25))).ceil() as usize;
    let hy = (n + 2.0) / count as f64;
    let (v, d): (Vec<f64>, Vec<f64>) = (0..=count)
        .map(|k| {
            let y = -1.0 + k as f64 * hy;
            let (c, dc) = cutoff(y, n);
            let (t, dt) = probe.t_profile.eval(y);
            (c * t, dc * t + c * dt)
        })
        .unzip();
    let sy = Samples { v, d, h: hy };
    let planar = norms_of(&sx, &sy, probe.amplitude);
    let planar_ratio = planar.linf * planar.linf / (planar.l2 * planar.grad_inf);
    Ok(CutoffChain {
        planar,
        planar_ratio,
        cylinder_ratio: probe.ratio,
        holds: probe.ratio <= 6.0 * planar_ratio,
        planar_below_bound: planar_ratio <= PLANE_BOUND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((PLANE_BOUND - 12f64.sqrt()).abs() < 1e-15);
        assert!((CYLINDER_BOUND - 6.0 * 12f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bspline_is_a_partition_of_unity() {
        for k in 0..20 {
            let x = k as f64 * 0.05;
            let s: f64 = (-3..=3).map(|j| bspline(x - j as f64).0).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn support_points_give_the_same_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let hull = support_points(&u, &w);
        for _ in 0..50 {
            let (p, q) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let brute = u
                .iter()
                .zip(&w)
                .map(|(a, b)| p * a + q * b)
                .fold(0.0, f64::max);
            let fast = hull.iter().map(|(a, b)| p * a + q * b).fold(0.0, f64::max);
            assert_eq!(brute, fast);
        }
    }

    #[test]
    fn trig_derivative_matches_difference_quotient() {
        let p = Profile::Trig {
            n: 3,
            y0: 0.4,
            power: 5,
            beta: 0.3,
            nu: 2,
        };
        for y in [0.1, 0.5, 1.7] {
            let h = 1e-6;
            let fd = (p.eval(y + h).0 - p.eval(y - h).0) / (2.0 * h);
            assert!((fd - p.eval(y).1).abs() < 1e-6);
        }
    }

    #[test]
    fn planar_probes_obey_the_planar_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = SobolevProbe::random(Domain::Plane, &mut rng).unwrap();
            let (_, g) = sobolev_ratio(&p);
            assert!(g.unwrap() <= PLANE_BOUND, "{}", g.unwrap());
            assert!(p.refinement_change().unwrap() < 0.01);
        }
    }

    #[test]
    fn degenerate_and_mismatched_probes_are_rejected() {
        let s = Profile::Spline {
            center: 0.0,
            width: 0.2,
            terms: vec![(0.0, 1.0)],
        };
        assert!(matches!(
            SobolevProbe::new(Domain::Plane, s.clone(), s.clone(), 0.0),
            Err(AnalysisError::Degenerate)
        ));
        let left = Profile::Spline {
            center: -5.0,
            width: 0.2,
            terms: vec![(0.0, 1.0)],
        };
        assert!(matches!(
            SobolevProbe::new(Domain::HalfPlane, left, s.clone(), 1.0),
            Err(AnalysisError::Degenerate)
        ));
        assert!(SobolevProbe::new(Domain::Cylinder { n: 2 }, s.clone(), s, 1.0).is_err());
        assert!(estimate_sobolev_constant(false, &[1], 0, 0).is_err());
    }

    #[test]
    fn cut_off_chain_on_a_cylinder_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 3] {
            let p = SobolevProbe::random(Domain::Cylinder { n }, &mut rng).unwrap();
            let c = cutoff_chain(&p).unwrap();
            assert!(c.holds && c.planar_below_bound, "{c:?}");
        }
    }

    #[test]
    fn translation_in_t_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = SobolevProbe::random(Domain::Cylinder { n: 4 }, &mut rng).unwrap();
        let mut t = p.t_profile.clone();
        if let Profile::Trig { y0, .. } = &mut t {
            *y0 += 1.25;
        }
        let q = SobolevProbe::new(p.domain, p.s_profile.clone(), t, 1.0).unwrap();
        assert_eq!(p.ratio, q.ratio);
    }
}
