use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FloerError;

/// Nodes `s_i = i·hs` (`i = 0..=ns`) and `t_j = j·ht` (`j = 0..nt`, periodic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub n: u32,
    pub s_max: f64,
    pub ns: usize,
    pub nt: usize,
}

impl CylinderGrid {
    pub fn new(n: u32, s_max: f64, ns: usize, nt: usize) -> Result<Self, FloerError> {
        if n == 0 {
            return Err(FloerError::InvalidInput("period n must be positive".into()));
        }
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(FloerError::InvalidInput(format!(
                "bad truncation S = {s_max}"
            )));
        }
        if ns < 4 || nt < 5 {
            return Err(FloerError::InvalidInput(format!(
                "grid {ns}x{nt} too small (need ns >= 4, nt >= 5)"
            )));
        }
        Ok(Self { n, s_max, ns, nt })
    }

    pub fn hs(&self) -> f64 {
        self.s_max / self.ns as f64
    }

    pub fn ht(&self) -> f64 {
        self.n as f64 / self.nt as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        i as f64 * self.hs()
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.ht()
    }

    pub fn len(&self) -> usize {
        (self.ns + 1) * self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    /// Trapezoid weight in s.
    #[inline]
    pub fn ws(&self, i: usize) -> f64 {
        if i == 0 || i == self.ns {
            0.5
        } else {
            1.0
        }
    }

    /// Same grid with both counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            ns: 2 * self.ns,
            nt: 2 * self.nt,
            ..*self
        }
    }

    /// Trapezoid quadrature of a nodal field over `[0, S] × ℝ/nℤ`.
    pub fn integrate(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..=self.ns {
            let mut row = 0.0;
            for j in 0..self.nt {
                row += f(i, j);
            }
            sum += self.ws(i) * row;
        }
        sum * self.hs() * self.ht()
    }
}

/// Second-order `∂_s` with one-sided stencils at `s = 0` and `s = S`.
#[inline]
pub fn ds(g: &CylinderGrid, z: &[Complex64], i: usize, j: usize) -> Complex64 {
    let nt = g.nt;
    let c = 0.5 / g.hs();
    let at = |ii: usize| z[ii * nt + j];
    if i == 0 {
        (at(0) * -3.0 + at(1) * 4.0 - at(2)) * c
    } else if i == g.ns {
        (at(i) * 3.0 - at(i - 1) * 4.0 + at(i - 2)) * c
    } else {
        (at(i + 1) - at(i - 1)) * c
    }
}

/// Fourth-order periodic `∂_t`.
#[inline]
pub fn dt(g: &CylinderGrid, z: &[Complex64], i: usize, j: usize) -> Complex64 {
    let nt = g.nt;
    let row = &z[i * nt..(i + 1) * nt];
    let p1 = row[(j + 1) % nt];
    let p2 = row[(j + 2) % nt];
    let m1 = row[(j + nt - 1) % nt];
    let m2 = row[(j + nt - 2) % nt];
    (p1 * 8.0 - m1 * 8.0 - p2 + m2) / (12.0 * g.ht())
}

/// Symbol of [`dt`] on the discrete Fourier mode `m`: `D_t e_m = i σ_m e_m`.
pub fn dt_symbol(g: &CylinderGrid, m: usize) -> f64 {
    let th = 2.0 * std::f64::consts::PI * m as f64 / g.nt as f64;
    (8.0 * th.sin() - (2.0 * th).sin()) / (6.0 * g.ht())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub s_max: f64,
    /// `e^{−2π{nα} S / n}` at the chosen S.
    pub tail: f64,
    /// False when the requested tail tolerance needed `S` beyond the cap.
    pub feasible: bool,
}

/// Truncation length from the rigid decay rate `2π{nα}/n`.
pub fn choose_truncation(frac: f64, n: u32, tail_tol: f64, s_cap: f64) -> Truncation {
    let rate = 2.0 * std::f64::consts::PI * frac / n as f64;
    let wanted = if rate > 0.0 {
        (1.0 / tail_tol).ln() / rate
    } else {
        f64::INFINITY
    };
    if wanted <= s_cap {
        Truncation {
            s_max: wanted,
            tail: (-rate * wanted).exp(),
            feasible: true,
        }
    } else {
        Truncation {
            s_max: s_cap,
            tail: (-rate * s_cap).exp(),
            feasible: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_closure_and_spacing() {
        let g = CylinderGrid::new(5, 80.0, 256, 512).unwrap();
        assert_eq!(g.ht() * g.nt as f64, 5.0);
        assert_eq!(g.hs(), 80.0 / 256.0);
        assert!(CylinderGrid::new(0, 1.0, 8, 8).is_err());
        assert!(CylinderGrid::new(1, 1.0, 8, 4).is_err());
    }

    #[test]
    fn stencils_are_exact_on_low_order_data() {
        let g = CylinderGrid::new(2, 4.0, 8, 16).unwrap();
        // z = s² is differentiated exactly by all second-order s stencils.
        let z: Vec<Complex64> = (0..g.len())
            .map(|k| Complex64::new(g.s(k / g.nt).powi(2), 0.0))
            .collect();
        for i in 0..=g.ns {
            assert!((ds(&g, &z, i, 3).re - 2.0 * g.s(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn dt_symbol_matches_stencil() {
        let g = CylinderGrid::new(3, 1.0, 4, 24).unwrap();
        let m = 5;
        let z: Vec<Complex64> = (0..g.len())
            .map(|k| {
                let j = k % g.nt;
                Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * (m * j) as f64 / g.nt as f64,
                )
            })
            .collect();
        let d = dt(&g, &z, 2, 7);
        let expect = Complex64::i() * dt_symbol(&g, m) * z[g.idx(2, 7)];
        assert!((d - expect).norm() < 1e-12);
    }

    #[test]
    fn truncation_reports_infeasible_tails() {
        let f = 0.0901699;
        let tr = choose_truncation(f, 5, 1e-4, 1e4);
        assert!(tr.feasible);
        assert!((tr.tail - 1e-4).abs() < 1e-12);
        let tiny = choose_truncation(1e-40, 64, 1e-4, 1e4);
        assert!(!tiny.feasible);
        assert!(tiny.tail > 0.99);
    }
}
