//! Fixed-step RK4 and step-doubling adaptive integration of `ξ' = X_{H^t}(ξ)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{DiskPoint, Hamiltonian, HamiltonianError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    /// RK4 with step doubling; `tol` bounds the local error per step.
    Adaptive {
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub step: f64,
    pub scheme: Scheme,
    /// Re-run with half the step and compare endpoints.
    pub validate: bool,
    pub validation_tol: f64,
    /// Allowed excursion beyond the unit circle.
    pub drift_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            scheme: Scheme::Rk4,
            validate: false,
            validation_tol: 1e-8,
            drift_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<DiskPoint>,
    pub step: f64,
    pub order: u32,
    /// Endpoint difference against the half-step run, when validated.
    pub halving_difference: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> DiskPoint {
        *self
            .points
            .last()
            .expect("trajectory has at least one point")
    }

    /// CSV with header `t,x,y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,y")?;
        for (t, p) in self.times.iter().zip(&self.points) {
            writeln!(w, "{t:.17e},{:.17e},{:.17e}", p.x, p.y)?;
        }
        Ok(())
    }
}

#[inline]
fn rk4_step(h: &Hamiltonian, t: f64, p: [f64; 2], dt: f64) -> [f64; 2] {
    let f = |t: f64, q: [f64; 2]| h.vector_field(t, q[0], q[1]);
    let k1 = f(t, p);
    let k2 = f(
        t + 0.5 * dt,
        [p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]],
    );
    let k3 = f(
        t + 0.5 * dt,
        [p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]],
    );
    let k4 = f(t + dt, [p[0] + dt * k3[0], p[1] + dt * k3[1]]);
    [
        p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn check_drift(p: [f64; 2], t: f64, tol: f64) -> Result<(), HamiltonianError> {
    let r = p[0].hypot(p[1]);
    if r > 1.0 + tol || !r.is_finite() {
        return Err(HamiltonianError::IntegrationDrift {
            time: t,
            radius: r,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Ends of the smooth pieces of `[t0, t1]` (or `[t1, t0]`), in travel order.
fn segment_ends(h: &Hamiltonian, t0: f64, t1: f64) -> Vec<f64> {
    let bps = h.time_breakpoints();
    let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    let mut cuts = Vec::new();
    if !bps.is_empty() {
        let mut k = lo.floor();
        while k <= hi {
            for b in &bps {
                let c = k + b;
                if c > lo + 1e-12 && c < hi - 1e-12 {
                    cuts.push(c);
                }
            }
            k += 1.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    if t0 > t1 {
        cuts.reverse();
    }
    cuts.push(t1);
    cuts
}

/// Integrates from `t0` to `t1` (either direction), calling `visit` after each step.
fn integrate(
    h: &Hamiltonian,
    p: DiskPoint,
    t0: f64,
    t1: f64,
    cfg: &FlowConfig,
    step: f64,
    mut visit: impl FnMut(f64, DiskPoint),
) -> Result<DiskPoint, HamiltonianError> {
    if !(step > 0.0) {
        return Err(HamiltonianError::InvalidInput(
            "step must be positive".into(),
        ));
    }
    let mut q = [p.x, p.y];
    let span = t1 - t0;
    if span == 0.0 || (p.x == 0.0 && p.y == 0.0) {
        return Ok(p);
    }
    match cfg.scheme {
        Scheme::Rk4 => {
            let mut t_start = t0;
            for t_end in segment_ends(h, t0, t1) {
                let seg = t_end - t_start;
                let n = (seg.abs() / step).ceil().max(1.0) as u64;
                let dt = seg / n as f64;
                for i in 0..n {
                    let t = t_start + i as f64 * dt;
                    q = rk4_step(h, t, q, dt);
                    let tn = if i + 1 == n {
                        t_end
                    } else {
                        t_start + (i + 1) as f64 * dt
                    };
                    check_drift(q, tn, cfg.drift_tol)?;
                    visit(tn, DiskPoint::new(q[0], q[1]));
                }
                t_start = t_end;
            }
        }
        Scheme::Adaptive { tol } => {
            let dir = span.signum();
            let mut t = t0;
            let mut dt = step.min(span.abs());
            while (t1 - t) * dir > 0.0 {
                dt = dt.min((t1 - t).abs());
                let big = rk4_step(h, t, q, dir * dt);
                let half = rk4_step(h, t, q, 0.5 * dir * dt);
                let small = rk4_step(h, t + 0.5 * dir * dt, half, 0.5 * dir * dt);
                let err = (small[0] - big[0]).hypot(small[1] - big[1]) / 15.0;
                if err <= tol || dt < 1e-12 {
                    // Richardson-extrapolated update.
                    q = [
                        small[0] + (small[0] - big[0]) / 15.0,
                        small[1] + (small[1] - big[1]) / 15.0,
                    ];
                    let reached = (t1 - (t + dir * dt)) * dir <= 0.0;
                    t = if reached { t1 } else { t + dir * dt };
                    check_drift(q, t, cfg.drift_tol)?;
                    visit(t, DiskPoint::new(q[0], q[1]));
                }
                let factor = if err == 0.0 {
                    2.0
                } else {
                    (0.9 * (tol / err).powf(0.2)).clamp(0.2, 2.0)
                };
                dt *= factor;
            }
        }
    }
    Ok(DiskPoint::new(q[0], q[1]))
}

fn validate_halving(
    h: &Hamiltonian,
    p: DiskPoint,
    t0: f64,
    t1: f64,
    cfg: &FlowConfig,
    end: DiskPoint,
) -> Result<f64, HamiltonianError> {
    let fine = integrate(h, p, t0, t1, cfg, 0.5 * cfg.step, |_, _| {})?;
    let diff = fine.dist(&end);
    if diff > cfg.validation_tol {
        return Err(HamiltonianError::StepValidation {
            difference: diff,
            tolerance: cfg.validation_tol,
        });
    }
    Ok(diff)
}

/// Flow from `t0` to `t1 >= t0`, recording every step.
pub fn flow(
    h: &Hamiltonian,
    p: DiskPoint,
    t0: f64,
    t1: f64,
    cfg: &FlowConfig,
) -> Result<Trajectory, HamiltonianError> {
    if t1 < t0 {
        return Err(HamiltonianError::InvalidInput(
            "flow requires t0 <= t1".into(),
        ));
    }
    if !p.in_disk(cfg.drift_tol) {
        return Err(HamiltonianError::InvalidInput(format!(
            "start point ({}, {}) is outside the disk",
            p.x, p.y
        )));
    }
    let mut times = vec![t0];
    let mut points = vec![p];
    let end = integrate(h, p, t0, t1, cfg, cfg.step, |t, q| {
        times.push(t);
        points.push(q);
    })?;
    if points.len() == 1 && t1 > t0 {
        // Rest point: the trajectory is constant.
        times.push(t1);
        points.push(p);
    }
    let halving_difference = if cfg.validate {
        Some(validate_halving(h, p, t0, t1, cfg, end)?)
    } else {
        None
    };
    Ok(Trajectory {
        times,
        points,
        step: cfg.step,
        order: 4,
        halving_difference,
    })
}

/// Endpoint of the flow over `[t0, t1]` in either direction, without storage.
pub fn advance(
    h: &Hamiltonian,
    p: DiskPoint,
    t0: f64,
    t1: f64,
    cfg: &FlowConfig,
) -> Result<DiskPoint, HamiltonianError> {
    let end = integrate(h, p, t0, t1, cfg, cfg.step, |_, _| {})?;
    if cfg.validate {
        validate_halving(h, p, t0, t1, cfg, end)?;
    }
    Ok(end)
}

pub fn time_one_map(
    h: &Hamiltonian,
    p: DiskPoint,
    cfg: &FlowConfig,
) -> Result<DiskPoint, HamiltonianError> {
    advance(h, p, 0.0, 1.0, cfg)
}

/// `φⁿ(p)`; negative `n` integrates backward. The origin is returned as is.
pub fn iterate(
    h: &Hamiltonian,
    p: DiskPoint,
    n: i64,
    cfg: &FlowConfig,
) -> Result<DiskPoint, HamiltonianError> {
    if n == 0 || (p.x == 0.0 && p.y == 0.0) {
        return Ok(p);
    }
    let dir = n.signum() as f64;
    let mut q = p;
    for k in 0..n.unsigned_abs() {
        let t = dir * k as f64;
        q = advance(h, q, t, t + dir, cfg)?;
    }
    Ok(q)
}

/// `[p, φ(p), …, φⁿ(p)]`.
pub fn orbit_at_integer_times(
    h: &Hamiltonian,
    p: DiskPoint,
    n: u64,
    cfg: &FlowConfig,
) -> Result<Vec<DiskPoint>, HamiltonianError> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(p);
    let mut q = p;
    for k in 0..n {
        q = advance(h, q, k as f64, k as f64 + 1.0, cfg)?;
        out.push(q);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian_disk::{Bump, Stage};
    use std::f64::consts::PI;

    fn perturbed() -> Hamiltonian {
        Hamiltonian::perturbed(
            0.618,
            0.05,
            vec![Bump::new(1, 0, 1, 0.2, 1.0), Bump::new(0, 3, 2, 0.0, 1.0)],
        )
    }

    #[test]
    fn rigid_rotation_endpoint() {
        let a = 0.3;
        let h = Hamiltonian::rigid(a);
        let tr = flow(
            &h,
            DiskPoint::new(1.0, 0.0),
            0.0,
            1.0,
            &FlowConfig::default(),
        )
        .unwrap();
        let e = tr.last();
        assert!((e.x - (2.0 * PI * a).cos()).abs() < 1e-11);
        assert!((e.y - (2.0 * PI * a).sin()).abs() < 1e-11);
        assert_eq!(tr.times.len(), 1001);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn zero_time_and_origin() {
        let h = perturbed();
        let cfg = FlowConfig::default();
        let p = DiskPoint::new(0.3, 0.1);
        let tr = flow(&h, p, 0.4, 0.4, &cfg).unwrap();
        assert_eq!(tr.points, vec![p]);
        let tr = flow(&h, DiskPoint::ORIGIN, 0.0, 3.0, &cfg).unwrap();
        assert!(tr.points.iter().all(|q| *q == DiskPoint::ORIGIN));
        assert_eq!(
            iterate(&h, DiskPoint::ORIGIN, 7, &cfg).unwrap(),
            DiskPoint::ORIGIN
        );
        // Integrated rather than short-circuited: still fixed.
        let near = advance(&h, DiskPoint::new(0.0, 0.0), 0.0, 2.0, &cfg).unwrap();
        assert_eq!(near, DiskPoint::ORIGIN);
    }

    #[test]
    fn rigid_iterates_rotate() {
        let a = 0.618_033_988_749_894_9;
        let h = Hamiltonian::rigid(a);
        let cfg = FlowConfig::default();
        let p = DiskPoint::polar(0.8, 0.4);
        let q = iterate(&h, p, 13, &cfg).unwrap();
        let expect = DiskPoint::polar(0.8, 0.4 + 2.0 * PI * 13.0 * a);
        assert!(q.dist(&expect) < 1e-10);
    }

    #[test]
    fn composition_and_reversibility() {
        let h = perturbed();
        let cfg = FlowConfig::default();
        let p = DiskPoint::new(0.5, -0.3);
        let a = iterate(&h, iterate(&h, p, 2, &cfg).unwrap(), 3, &cfg).unwrap();
        let b = iterate(&h, p, 5, &cfg).unwrap();
        assert!(a.dist(&b) < 1e-9);
        let fwd = advance(&h, p, 0.0, 1.0, &cfg).unwrap();
        let back = advance(&h, fwd, 1.0, 0.0, &cfg).unwrap();
        assert!(back.dist(&p) < 1e-10);
        let inv = iterate(&h, iterate(&h, p, 3, &cfg).unwrap(), -3, &cfg).unwrap();
        assert!(inv.dist(&p) < 1e-9);
    }

    #[test]
    fn inverse_hamiltonian_inverts_the_map() {
        let h = perturbed();
        let cfg = FlowConfig::default();
        let p = DiskPoint::new(-0.2, 0.6);
        let q = time_one_map(&h, p, &cfg).unwrap();
        let back = time_one_map(&h.inverse(), q, &cfg).unwrap();
        assert!(back.dist(&p) < 1e-9);
    }

    #[test]
    fn staged_map_is_a_conjugated_rotation() {
        let a = 0.2;
        let h = Hamiltonian::Staged {
            alpha: a,
            stages: vec![Stage {
                bumps: vec![Bump::new(1, 2, 0, 0.3, 2.0)],
            }],
        };
        let cfg = FlowConfig::default();
        // Boundary points are rotated exactly like the rigid rotation.
        let q = time_one_map(&h, DiskPoint::new(1.0, 0.0), &cfg).unwrap();
        assert!(q.dist(&DiskPoint::polar(1.0, 2.0 * PI * a)) < 1e-10);
        // h⁻¹Rh with R of order 5 has φ⁵ = id.
        let p = DiskPoint::new(0.4, 0.3);
        let q = iterate(&h, p, 5, &cfg).unwrap();
        assert!(q.dist(&p) < 1e-8, "{}", q.dist(&p));
    }

    #[test]
    fn adaptive_matches_fixed_step() {
        let h = perturbed();
        let p = DiskPoint::new(0.1, 0.7);
        let fixed = time_one_map(&h, p, &FlowConfig::default()).unwrap();
        let cfg = FlowConfig {
            scheme: Scheme::Adaptive { tol: 1e-12 },
            step: 1e-2,
            ..FlowConfig::default()
        };
        let tr = flow(&h, p, 0.0, 1.0, &cfg).unwrap();
        assert!(tr.last().dist(&fixed) < 1e-9);
        assert!(tr.times.len() < 1001);
    }

    #[test]
    fn step_halving_validation() {
        let h = perturbed();
        let cfg = FlowConfig {
            validate: true,
            ..FlowConfig::default()
        };
        let tr = flow(&h, DiskPoint::new(0.3, 0.3), 0.0, 1.0, &cfg).unwrap();
        assert!(tr.halving_difference.unwrap() < 1e-10);
        let coarse = FlowConfig {
            step: 0.5,
            validate: true,
            validation_tol: 1e-12,
            ..FlowConfig::default()
        };
        assert!(matches!(
            flow(&h, DiskPoint::new(0.3, 0.3), 0.0, 1.0, &coarse),
            Err(HamiltonianError::StepValidation { .. })
        ));
    }

    #[test]
    fn drift_is_detected() {
        // RK4 amplifies rotations once ω·dt exceeds about 2.83.
        let h = Hamiltonian::rigid(1.0);
        let cfg = FlowConfig {
            step: 0.5,
            ..FlowConfig::default()
        };
        let r = flow(&h, DiskPoint::new(1.0, 0.0), 0.0, 10.0, &cfg);
        assert!(matches!(r, Err(HamiltonianError::IntegrationDrift { .. })));
        let outside = flow(
            &h,
            DiskPoint::new(1.1, 0.0),
            0.0,
            1.0,
            &FlowConfig::default(),
        );
        assert!(matches!(outside, Err(HamiltonianError::InvalidInput(_))));
    }

    #[test]
    fn trajectory_csv() {
        let h = Hamiltonian::rigid(0.1);
        let cfg = FlowConfig {
            step: 0.5,
            ..FlowConfig::default()
        };
        let tr = flow(&h, DiskPoint::new(1.0, 0.0), 0.0, 1.0, &cfg).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,x,y\n"));
        assert_eq!(s.lines().count(), 4);
    }
}
