//! Damped Gauss–Newton for the discrete Floer residual.
//!
//! Unknowns are the nodes of rows `1..=ns` and one angle per boundary node.
//! Linear subproblems are solved by CGLS with a right preconditioner that is
//! exact for the rigid operator: a DFT in `t` followed, per mode, by the
//! inverse banded Cholesky factor of the normal matrix of the `s`-stencil.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::{self, CylinderGrid};
use super::{field_c, oracle_on_grid, FloerError, FloerSolution, NAlpha};
use crate::diophantine::RatInterval;
use crate::hamiltonian_disk::Hamiltonian;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Bound on the trapezoidal L² norm of the residual field.
    pub tolerance: f64,
    /// Weight of the far-end penalty `pw ∫ |z(S,t)|² dt`.
    pub penalty_weight: f64,
    pub step_tolerance: f64,
    pub cg_max_iterations: usize,
    pub cg_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 40,
            tolerance: 1e-3,
            penalty_weight: 1e-3,
            step_tolerance: 1e-11,
            cg_max_iterations: 300,
            cg_tolerance: 1e-6,
            initial_damping: 1e-8,
        }
    }
}

/// Oracle with uniform noise of relative size `amplitude` on interior nodes
/// and boundary angles.
pub fn noisy_seed(oracle: &FloerSolution, amplitude: f64, seed: u64) -> FloerSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = oracle.clone();
    let nt = out.grid.nt;
    for z in out.z[nt..].iter_mut() {
        let e = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        *z += e * amplitude;
    }
    for p in out.boundary_phase.iter_mut() {
        *p += amplitude * rng.gen_range(-1.0..1.0);
    }
    out.converged = false;
    out.sync();
    out
}

#[derive(Clone)]
struct Vars {
    z: Vec<Complex64>,
    phi: Vec<f64>,
}

impl Vars {
    fn zeros(nz: usize, nt: usize) -> Self {
        Self {
            z: vec![ZERO; nz],
            phi: vec![0.0; nt],
        }
    }
    fn dot(&self, o: &Self) -> f64 {
        cdot(&self.z, &o.z) + self.phi.iter().zip(&o.phi).map(|(a, b)| a * b).sum::<f64>()
    }
    fn axpy(&mut self, a: f64, o: &Self) {
        caxpy(&mut self.z, a, &o.z);
        for (x, y) in self.phi.iter_mut().zip(&o.phi) {
            *x += a * y;
        }
    }
    fn scale_add(&mut self, b: f64, o: &Self) {
        // self = o + b·self
        for (x, y) in self.z.iter_mut().zip(&o.z) {
            *x = y + *x * b;
        }
        for (x, y) in self.phi.iter_mut().zip(&o.phi) {
            *x = y + *x * b;
        }
    }
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.par_iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn caxpy(x: &mut [Complex64], a: f64, y: &[Complex64]) {
    x.par_iter_mut().zip(y).for_each(|(x, y)| *x += y * a);
}

/// Weighted residual vector: PDE rows then penalty rows.
struct Res {
    f: Vec<Complex64>,
    pen: Vec<Complex64>,
}

impl Res {
    fn norm_sqr(&self) -> f64 {
        cdot(&self.f, &self.f) + cdot(&self.pen, &self.pen)
    }
}

struct Problem<'a> {
    g: CylinderGrid,
    h: &'a Hamiltonian,
    row_w: Vec<f64>,
    pen_w: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Per mode, upper banded Cholesky factor `[diag, +1, +2]` of length `ns`.
    chol: Vec<Vec<[f64; 3]>>,
    phi_scale: f64,
}

impl<'a> Problem<'a> {
    fn new(g: CylinderGrid, h: &'a Hamiltonian, pw: f64) -> Self {
        let hs = g.hs();
        let ht = g.ht();
        let row_w: Vec<f64> = (0..=g.ns).map(|i| (g.ws(i) * hs * ht).sqrt()).collect();
        let pen_w = (pw * ht).sqrt();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(g.nt);
        let ifft = planner.plan_fft_inverse(g.nt);
        let a0 = 2.0 * PI * h.alpha();
        let chol = (0..g.nt)
            .into_par_iter()
            .map(|m| banded_normal_cholesky(&g, &row_w, pen_w, a0 - grid::dt_symbol(&g, m)))
            .collect();
        let c = 0.5 / hs;
        let phi_scale = (row_w[0].powi(2)
            * ((3.0 * c).powi(2) + a0 * a0 + 130.0 / (144.0 * ht * ht))
            + row_w[1].powi(2) * c * c)
            .sqrt();
        Self {
            g,
            h,
            row_w,
            pen_w,
            fft,
            ifft,
            chol,
            phi_scale,
        }
    }

    fn nz(&self) -> usize {
        self.g.ns * self.g.nt
    }

    fn full_field(&self, z: &[Complex64], phi: &[f64], k: i64) -> Vec<Complex64> {
        let g = &self.g;
        let mut out = Vec::with_capacity(g.len());
        for (j, p) in phi.iter().enumerate() {
            let th = 2.0 * PI * k as f64 * g.t(j) / g.n as f64 + p;
            out.push(Complex64::from_polar(1.0, th));
        }
        out.extend_from_slice(z);
        out
    }

    fn residual(&self, full: &[Complex64]) -> Res {
        let g = &self.g;
        let nt = g.nt;
        let mut f = vec![ZERO; g.len()];
        f.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
            for (j, out) in row.iter_mut().enumerate() {
                let x = field_c(self.h, g.t(j), full[g.idx(i, j)]);
                *out =
                    (grid::ds(g, full, i, j) + I * (grid::dt(g, full, i, j) - x)) * self.row_w[i];
            }
        });
        let pen = full[g.idx(g.ns, 0)..]
            .iter()
            .map(|z| z * self.pen_w)
            .collect();
        Res { f, pen }
    }

    /// Nodewise `K = −i·DX` as a real 2×2 matrix.
    fn linearization(&self, full: &[Complex64]) -> Vec<[[f64; 2]; 2]> {
        let g = &self.g;
        (0..g.len())
            .into_par_iter()
            .map(|k| {
                let z = full[k];
                let (_, d) = self.h.vector_field_jacobian(g.t(k % g.nt), z.re, z.im);
                [[d[1][0], d[1][1]], [-d[0][0], -d[0][1]]]
            })
            .collect()
    }

    fn apply_j(&self, lin: &Lin, dz: &[Complex64], dphi: &[f64]) -> Res {
        let g = &self.g;
        let nt = g.nt;
        let mut full = Vec::with_capacity(g.len());
        for j in 0..nt {
            full.push(I * lin.z0[j] * dphi[j]);
        }
        full.extend_from_slice(dz);
        let mut f = vec![ZERO; g.len()];
        f.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
            for (j, out) in row.iter_mut().enumerate() {
                let k = g.idx(i, j);
                let v = full[k];
                let m = &lin.k[k];
                let kv = Complex64::new(
                    m[0][0] * v.re + m[0][1] * v.im,
                    m[1][0] * v.re + m[1][1] * v.im,
                );
                *out =
                    (grid::ds(g, &full, i, j) + I * grid::dt(g, &full, i, j) + kv) * self.row_w[i];
            }
        });
        let pen = dz[(g.ns - 1) * nt..]
            .iter()
            .map(|z| z * self.pen_w)
            .collect();
        Res { f, pen }
    }

    fn apply_jt(&self, lin: &Lin, r: &Res) -> (Vec<Complex64>, Vec<f64>) {
        let g = &self.g;
        let nt = g.nt;
        let ns = g.ns;
        let c = 0.5 / g.hs();
        let u: Vec<Complex64> =
            r.f.par_iter()
                .enumerate()
                .map(|(k, v)| v * self.row_w[k / nt])
                .collect();
        let mut w = vec![ZERO; g.len()];
        w.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
            // Transpose of the s-stencil: collect every row that reads node i.
            let at = |ii: usize, j: usize| u[ii * nt + j];
            for (j, out) in row.iter_mut().enumerate() {
                let mut s = ZERO;
                match i {
                    0 => s += at(0, j) * (-3.0) + at(1, j) * (-1.0),
                    _ => {
                        if i == 1 {
                            s += at(0, j) * 4.0;
                        } else if i == 2 {
                            s -= at(0, j);
                        }
                        if i >= 2 && i - 1 < ns {
                            s += at(i - 1, j);
                        }
                        if i + 1 < ns {
                            s -= at(i + 1, j);
                        }
                        if i == ns {
                            s += at(ns, j) * 3.0;
                        } else if i == ns - 1 {
                            s -= at(ns, j) * 4.0;
                        } else if i == ns - 2 {
                            s += at(ns, j);
                        }
                    }
                }
                s *= c;
                let k = g.idx(i, j);
                let v = u[k];
                let m = &lin.k[k];
                let ktv = Complex64::new(
                    m[0][0] * v.re + m[1][0] * v.im,
                    m[0][1] * v.re + m[1][1] * v.im,
                );
                *out = s + I * grid::dt(g, &u, i, j) + ktv;
            }
        });
        let mut dz = w.split_off(nt);
        for (x, p) in dz[(ns - 1) * nt..].iter_mut().zip(&r.pen) {
            *x += p * self.pen_w;
        }
        let dphi = (0..nt)
            .map(|j| ((I * lin.z0[j]).conj() * w[j]).re)
            .collect();
        (dz, dphi)
    }

    /// `P y` (`transpose == false`) or `Pᵀ y`, in place on rows `1..=ns`.
    fn precondition(&self, y: &mut [Complex64], transpose: bool) {
        let nt = self.g.nt;
        let ns = self.g.ns;
        let norm = 1.0 / (nt as f64).sqrt();
        y.par_chunks_mut(nt).for_each(|row| {
            self.fft.process(row);
            for v in row.iter_mut() {
                *v *= norm;
            }
        });
        // Per mode solve along s; gather columns, then scatter back.
        let cols: Vec<Vec<Complex64>> = (0..nt)
            .into_par_iter()
            .map(|m| {
                let mut col: Vec<Complex64> = (0..ns).map(|i| y[i * nt + m]).collect();
                let r = &self.chol[m];
                if transpose {
                    solve_rt(r, &mut col);
                } else {
                    solve_r(r, &mut col);
                }
                col
            })
            .collect();
        for (m, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                y[i * nt + m] = *v;
            }
        }
        y.par_chunks_mut(nt).for_each(|row| {
            self.ifft.process(row);
            for v in row.iter_mut() {
                *v *= norm;
            }
        });
    }

    fn op(&self, lin: &Lin, y: &Vars) -> Res {
        let mut dz = y.z.clone();
        self.precondition(&mut dz, false);
        let dphi: Vec<f64> = y.phi.iter().map(|p| p / self.phi_scale).collect();
        self.apply_j(lin, &dz, &dphi)
    }

    fn op_t(&self, lin: &Lin, r: &Res) -> Vars {
        let (mut z, phi) = self.apply_jt(lin, r);
        self.precondition(&mut z, true);
        Vars {
            z,
            phi: phi.iter().map(|p| p / self.phi_scale).collect(),
        }
    }

    fn to_step(&self, y: &Vars) -> Vars {
        let mut z = y.z.clone();
        self.precondition(&mut z, false);
        Vars {
            z,
            phi: y.phi.iter().map(|p| p / self.phi_scale).collect(),
        }
    }

    /// Damped least squares `min ‖A y + r‖² + λ‖y‖²` by CGLS.
    fn cgls(&self, lin: &Lin, r: &Res, lambda: f64, cfg: &SolverConfig) -> (Vars, usize) {
        let mut x = Vars::zeros(self.nz(), self.g.nt);
        let mut res = Res {
            f: r.f.iter().map(|v| -v).collect(),
            pen: r.pen.iter().map(|v| -v).collect(),
        };
        let mut s = self.op_t(lin, &res);
        let mut p = s.clone();
        let mut gamma = s.dot(&s);
        let gamma0 = gamma;
        let mut it = 0;
        while it < cfg.cg_max_iterations && gamma > cfg.cg_tolerance.powi(2) * gamma0 && gamma > 0.0
        {
            it += 1;
            let q = self.op(lin, &p);
            let delta = q.norm_sqr() + lambda * p.dot(&p);
            let a = gamma / delta;
            x.axpy(a, &p);
            caxpy(&mut res.f, -a, &q.f);
            caxpy(&mut res.pen, -a, &q.pen);
            s = self.op_t(lin, &res);
            s.axpy(-lambda, &x);
            let gn = s.dot(&s);
            p.scale_add(gn / gamma, &s);
            gamma = gn;
        }
        (x, it)
    }
}

struct Lin {
    z0: Vec<Complex64>,
    k: Vec<[[f64; 2]; 2]>,
}

fn banded_normal_cholesky(g: &CylinderGrid, row_w: &[f64], pen_w: f64, a: f64) -> Vec<[f64; 3]> {
    let ns = g.ns;
    let c = 0.5 / g.hs();
    // Symmetric pentadiagonal normal matrix on unknown rows 1..=ns (index i-1).
    let mut m = vec![[0.0f64; 3]; ns];
    let mut add_row = |entries: &[(usize, f64)]| {
        for &(p, vp) in entries {
            for &(q, vq) in entries {
                if q >= p {
                    m[p - 1][q - p] += vp * vq;
                }
            }
        }
    };
    add_row(&[(1, 4.0 * c * row_w[0]), (2, -c * row_w[0])]);
    for i in 1..ns {
        let w = row_w[i];
        let mut e = Vec::with_capacity(3);
        if i >= 2 {
            e.push((i - 1, -c * w));
        }
        e.push((i, a * w));
        e.push((i + 1, c * w));
        add_row(&e);
    }
    let w = row_w[ns];
    add_row(&[
        (ns - 2, c * w),
        (ns - 1, -4.0 * c * w),
        (ns, (3.0 * c + a) * w),
    ]);
    add_row(&[(ns, pen_w)]);
    // In-place banded Cholesky, upper factor R with M = RᵀR.
    let mut r = vec![[0.0f64; 3]; ns];
    for i in 0..ns {
        let mut d = m[i][0];
        if i >= 1 {
            d -= r[i - 1][1] * r[i - 1][1];
        }
        if i >= 2 {
            d -= r[i - 2][2] * r[i - 2][2];
        }
        let d = d.max(f64::MIN_POSITIVE).sqrt();
        r[i][0] = d;
        if i + 1 < ns {
            let mut e = m[i][1];
            if i >= 1 {
                e -= r[i - 1][1] * r[i - 1][2];
            }
            r[i][1] = e / d;
        }
        if i + 2 < ns {
            r[i][2] = m[i][2] / d;
        }
    }
    r
}

/// `x ← R⁻¹ x`.
fn solve_r(r: &[[f64; 3]], x: &mut [Complex64]) {
    let n = x.len();
    for i in (0..n).rev() {
        let mut v = x[i];
        if i + 1 < n {
            v -= x[i + 1] * r[i][1];
        }
        if i + 2 < n {
            v -= x[i + 2] * r[i][2];
        }
        x[i] = v / r[i][0];
    }
}

/// `x ← R⁻ᵀ x`.
fn solve_rt(r: &[[f64; 3]], x: &mut [Complex64]) {
    for i in 0..x.len() {
        let mut v = x[i];
        if i >= 1 {
            v -= x[i - 1] * r[i - 1][1];
        }
        if i >= 2 {
            v -= x[i - 2] * r[i - 2][2];
        }
        x[i] = v / r[i][0];
    }
}

/// Solves the Floer equation for `h` with boundary degree `⌊nα⌋`.
///
/// Without a seed the rigid oracle is used. A non-converged run is returned
/// with `converged == false` and its residual history.
pub fn solve_floer(
    h: &Hamiltonian,
    n: u32,
    alpha: &RatInterval,
    grid: &CylinderGrid,
    seed: Option<&FloerSolution>,
    cfg: &SolverConfig,
) -> Result<FloerSolution, FloerError> {
    let na = NAlpha::from_enclosure(alpha, n)?;
    if grid.n != n {
        return Err(FloerError::InvalidInput(
            "grid period differs from n".into(),
        ));
    }
    h.validate()
        .map_err(|e| FloerError::InvalidInput(e.to_string()))?;
    let start = match seed {
        Some(s) => {
            if s.grid != *grid {
                return Err(FloerError::InvalidInput(
                    "seed grid differs from solver grid".into(),
                ));
            }
            if s.boundary_degree != na.degree {
                return Err(FloerError::InvalidInput(format!(
                    "seed degree {} differs from ⌊nα⌋ = {}",
                    s.boundary_degree, na.degree
                )));
            }
            s.clone()
        }
        None => oracle_on_grid(na, h.alpha(), 0.0, grid),
    };
    let k = na.degree;
    let prob = Problem::new(*grid, h, cfg.penalty_weight);
    let nt = grid.nt;
    let mut z = start.z[nt..].to_vec();
    let mut phi = start.boundary_phase.clone();
    let mut full = prob.full_field(&z, &phi, k);
    let mut r = prob.residual(&full);
    let mut cost = r.norm_sqr();
    let mut lambda = cfg.initial_damping;
    let mut history = vec![cost.sqrt()];
    let mut iterations = 0;
    let mut stationary = false;
    let mut failures = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let lin = Lin {
            z0: full[..nt].to_vec(),
            k: prob.linearization(&full),
        };
        let (y, _) = prob.cgls(&lin, &r, lambda, cfg);
        let step = prob.to_step(&y);
        let (nz, nphi, nfull, nr, ncost) = trial(&prob, &z, &phi, &step, 1.0, k);
        if ncost.is_finite() && ncost < cost {
            let size = step_size(&step);
            let decrease = (cost - ncost) / cost.max(f64::MIN_POSITIVE);
            z = nz;
            phi = nphi;
            full = nfull;
            r = nr;
            cost = ncost;
            history.push(cost.sqrt());
            lambda = (lambda / 3.0).max(1e-14);
            failures = 0;
            if size < cfg.step_tolerance || decrease < 1e-13 {
                stationary = true;
                break;
            }
            continue;
        }
        if step_size(&step) < cfg.step_tolerance {
            stationary = true;
            break;
        }
        failures += 1;
        lambda = (lambda * 10.0).max(1e-6);
        if failures >= 3 {
            // Gauss–Newton keeps failing: preconditioned steepest descent.
            let gy = prob.op_t(&lin, &r);
            let mut dir = prob.to_step(&gy);
            for v in dir.z.iter_mut() {
                *v = -*v;
            }
            for v in dir.phi.iter_mut() {
                *v = -*v;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let (nz, nphi, nfull, nr, ncost) = trial(&prob, &z, &phi, &dir, t, k);
                if ncost.is_finite() && ncost < cost {
                    z = nz;
                    phi = nphi;
                    full = nfull;
                    r = nr;
                    cost = ncost;
                    history.push(cost.sqrt());
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            failures = 0;
            if !accepted {
                stationary = true;
                break;
            }
        }
    }
    let mut sol = FloerSolution {
        grid: *grid,
        z: full,
        boundary_degree: k,
        boundary_phase: phi,
        hamiltonian: h.clone(),
        n_alpha: na,
        residual_norm: 0.0,
        residual_max: 0.0,
        converged: false,
        iterations,
        history,
        penalty_weight: cfg.penalty_weight,
    };
    sol.sync();
    sol.converged = stationary && sol.residual_norm <= cfg.tolerance;
    Ok(sol)
}

fn step_size(s: &Vars) -> f64 {
    let a = s.z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    s.phi.iter().map(|v| v.abs()).fold(a, f64::max)
}

type Trial = (Vec<Complex64>, Vec<f64>, Vec<Complex64>, Res, f64);

fn trial(prob: &Problem, z: &[Complex64], phi: &[f64], step: &Vars, t: f64, k: i64) -> Trial {
    let mut nz = z.to_vec();
    caxpy(&mut nz, t, &step.z);
    let nphi: Vec<f64> = phi.iter().zip(&step.phi).map(|(a, b)| a + t * b).collect();
    let nfull = prob.full_field(&nz, &nphi, k);
    let nr = prob.residual(&nfull);
    let c = nr.norm_sqr();
    (nz, nphi, nfull, nr, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::ContinuedFraction;

    fn setup(ns: usize, nt: usize) -> (Hamiltonian, RatInterval, CylinderGrid) {
        let alpha = ContinuedFraction::golden(40).value_enclosure();
        let h = Hamiltonian::rigid(0.618_033_988_749_894_9);
        let g = CylinderGrid::new(5, 40.0, ns, nt).unwrap();
        (h, alpha, g)
    }

    #[test]
    fn adjoint_is_consistent() {
        let (h, _, g) = setup(12, 16);
        let h = match h {
            Hamiltonian::Rigid { alpha } => Hamiltonian::perturbed_standard(alpha, 0.3),
            _ => unreachable!(),
        };
        let prob = Problem::new(g, &h, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rc = |n: usize| -> Vec<Complex64> {
            (0..n)
                .map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                .collect()
        };
        let z = rc(prob.nz());
        let phi: Vec<f64> = (0..g.nt).map(|j| 0.1 * j as f64).collect();
        let full = prob.full_field(&z, &phi, 3);
        let lin = Lin {
            z0: full[..g.nt].to_vec(),
            k: prob.linearization(&full),
        };
        let x = Vars {
            z: rc(prob.nz()),
            phi: (0..g.nt).map(|j| (j as f64).sin()).collect(),
        };
        let r = Res {
            f: rc(g.len()),
            pen: rc(g.nt),
        };
        let ax = prob.op(&lin, &x);
        let aty = prob.op_t(&lin, &r);
        let lhs = cdot(&ax.f, &r.f) + cdot(&ax.pen, &r.pen);
        let rhs = x.dot(&aty);
        assert!(
            (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
            "{lhs} {rhs}"
        );
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (_, _, g) = setup(10, 16);
        let h = Hamiltonian::perturbed_standard(0.6, 0.5);
        let prob = Problem::new(g, &h, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<Complex64> = (0..prob.nz())
            .map(|_| Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)))
            .collect();
        let phi: Vec<f64> = (0..g.nt).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let dz: Vec<Complex64> = (0..prob.nz())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let dphi: Vec<f64> = (0..g.nt).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let full = prob.full_field(&z, &phi, 2);
        let lin = Lin {
            z0: full[..g.nt].to_vec(),
            k: prob.linearization(&full),
        };
        let jd = prob.apply_j(&lin, &dz, &dphi);
        let eps = 1e-6;
        let shifted = |s: f64| {
            let mut zz = z.clone();
            caxpy(&mut zz, s, &dz);
            let pp: Vec<f64> = phi.iter().zip(&dphi).map(|(a, b)| a + s * b).collect();
            prob.residual(&prob.full_field(&zz, &pp, 2))
        };
        let (rp, rm) = (shifted(eps), shifted(-eps));
        for k in 0..g.len() {
            let fd = (rp.f[k] - rm.f[k]) / (2.0 * eps);
            assert!(
                (fd - jd.f[k]).norm() < 1e-6,
                "node {k}: {fd} vs {}",
                jd.f[k]
            );
        }
    }

    #[test]
    fn preconditioner_inverts_rigid_normal_matrix() {
        let (h, _, g) = setup(16, 12);
        let prob = Problem::new(g, &h, 0.05);
        let full = prob.full_field(&vec![ZERO; prob.nz()], &vec![0.0; g.nt], 3);
        let lin = Lin {
            z0: full[..g.nt].to_vec(),
            k: prob.linearization(&full),
        };
        // With angles frozen, A = J P has orthonormal columns.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = Vars {
            z: (0..prob.nz())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
            phi: vec![0.0; g.nt],
        };
        let ay = prob.op(&lin, &y);
        let n2 = ay.norm_sqr();
        let y2 = y.dot(&y);
        assert!((n2 / y2 - 1.0).abs() < 1e-10, "{}", n2 / y2);
    }

    #[test]
    fn exact_seed_converges_immediately() {
        let (h, alpha, g) = setup(64, 128);
        let oracle = super::super::rigid_rotation_exact_solution(&alpha, 5, 0.0, &g).unwrap();
        let sol = solve_floer(&h, 5, &alpha, &g, Some(&oracle), &SolverConfig::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 4, "{}", sol.iterations);
        assert!(sol.max_deviation(&oracle) < 1e-2);
    }

    #[test]
    fn straddling_alpha_is_refused() {
        let (h, _, g) = setup(8, 8);
        let a = RatInterval::new(
            num_rational::BigRational::new(59.into(), 100.into()),
            num_rational::BigRational::new(61.into(), 100.into()),
        );
        let e = solve_floer(&h, 5, &a, &g, None, &SolverConfig::default()).unwrap_err();
        assert!(matches!(e, FloerError::DegreeUndetermined { n: 5 }));
    }
}
