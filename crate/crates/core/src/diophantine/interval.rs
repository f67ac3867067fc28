use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::text;

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatInterval {
    #[serde(with = "text::rational")]
    lo: BigRational,
    #[serde(with = "text::rational")]
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        Self {
            lo: v.clone(),
            hi: v,
        }
    }

    /// Hull of two (possibly unordered) values.
    pub fn hull(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// Membership test in floating point, for tests and diagnostics only.
    pub fn contains_f64(&self, v: f64) -> bool {
        let lo = self.lo.to_f64().unwrap_or(f64::NEG_INFINITY);
        let hi = self.hi.to_f64().unwrap_or(f64::INFINITY);
        lo <= v && v <= hi
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.hi, -&self.lo)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().expect("non-empty").clone();
        let hi = c.iter().max().expect("non-empty").clone();
        Self::new(lo, hi)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::hull(&self.lo * k, &self.hi * k)
    }

    /// Reciprocal of an interval that excludes zero.
    pub fn recip(&self) -> Self {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing zero"
        );
        Self::new(self.hi.recip(), self.lo.recip())
    }

    /// Outward-rounded floating-point endpoints.
    pub fn to_f64_outward(&self) -> (f64, f64) {
        (round_down(&self.lo), round_up(&self.hi))
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_f64_outward();
        write!(f, "[{lo:e}, {hi:e}]")
    }
}

/// Largest representable f64 not above `r` (within one ulp; never above).
pub fn round_down(r: &BigRational) -> f64 {
    let v = r.to_f64().unwrap_or(if r.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::MAX
    });
    if v.is_finite() && rational_of_f64(v).map_or(false, |x| &x > r) {
        next_down(v)
    } else {
        v
    }
}

/// Smallest representable f64 not below `r` (within one ulp; never below).
pub fn round_up(r: &BigRational) -> f64 {
    let v = r.to_f64().unwrap_or(if r.is_negative() {
        f64::MIN
    } else {
        f64::INFINITY
    });
    if v.is_finite() && rational_of_f64(v).map_or(false, |x| &x < r) {
        next_up(v)
    } else {
        v
    }
}

pub fn rational_of_f64(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

fn next_up(v: f64) -> f64 {
    if v == 0.0 {
        return f64::from_bits(1);
    }
    let b = v.to_bits();
    f64::from_bits(if v > 0.0 { b + 1 } else { b - 1 })
}

fn next_down(v: f64) -> f64 {
    -next_up(-v)
}

/// Approximate `log10` of a positive rational, valid far outside f64 range.
pub fn log10_approx(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    log10_big(r.numer()) - log10_big(r.denom())
}

fn log10_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).log10();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// Formats a non-negative rational in scientific notation with `digits`
/// significant digits, rounded down (`up == false`) or up.
pub fn format_sci(r: &BigRational, digits: u32, up: bool) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let mut e = log10_approx(&a).floor() as i64;
    let ten = BigInt::from(10);
    let scaled = |e: i64| -> BigRational {
        let shift = i64::from(digits) - 1 - e;
        if shift >= 0 {
            &a * BigRational::from_integer(ten.pow(shift as u32))
        } else {
            &a / BigRational::from_integer(ten.pow((-shift) as u32))
        }
    };
    let lower = BigRational::from_integer(ten.pow(digits - 1));
    let upper = BigRational::from_integer(ten.pow(digits));
    let mut s = scaled(e);
    // log10_approx may be off by one near powers of ten.
    while s < lower {
        e -= 1;
        s = scaled(e);
    }
    while s >= upper {
        e += 1;
        s = scaled(e);
    }
    let round_toward_up = up != neg;
    let m = if round_toward_up {
        s.ceil().to_integer()
    } else {
        s.floor().to_integer()
    };
    let (m, e) = if m == BigInt::from(10).pow(digits) {
        (BigInt::from(10).pow(digits - 1), e + 1)
    } else {
        (m, e)
    };
    let ms = m.to_string();
    let (head, tail) = ms.split_at(1);
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

pub fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_encloses() {
        let a = RatInterval::new(q(1, 3), q(1, 2));
        let b = RatInterval::new(q(-1, 1), q(2, 1));
        let p = a.mul(&b);
        assert_eq!(p.lo(), &q(-1, 2));
        assert_eq!(p.hi(), &q(1, 1));
        assert_eq!(a.sub(&a).lo(), &q(-1, 6));
        assert_eq!(a.recip().lo(), &q(2, 1));
    }

    #[test]
    fn outward_rounding_brackets_value() {
        let third = q(1, 3);
        let (lo, hi) = RatInterval::point(third.clone()).to_f64_outward();
        assert!(rational_of_f64(lo).unwrap() <= third);
        assert!(rational_of_f64(hi).unwrap() >= third);
        assert!(lo < hi);
    }

    #[test]
    fn scientific_formatting_rounds_outward() {
        assert_eq!(format_sci(&q(1, 3), 4, false), "3.333e-1");
        assert_eq!(format_sci(&q(1, 3), 4, true), "3.334e-1");
        assert_eq!(format_sci(&q(1000, 1), 3, false), "1.00e3");
        assert_eq!(format_sci(&q(9999, 1), 2, true), "1.0e4");
        let tiny = BigRational::new(BigInt::from(1), BigInt::from(10).pow(300) * 7);
        assert_eq!(format_sci(&tiny, 3, true), "1.43e-301");
    }

    #[test]
    fn log10_handles_huge_numbers() {
        let big = BigRational::from_integer(BigInt::from(10).pow(5000));
        assert!((log10_approx(&big) - 5000.0).abs() < 1e-9);
        assert!((log10_approx(&big.recip()) + 5000.0).abs() < 1e-9);
    }
}
