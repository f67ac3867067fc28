//! Certified rational bounds for `e^x`, `ln n`, and π.
//!
//! Everything here is computed in binary fixed point with directed rounding,
//! so every returned interval provably contains the true value.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::RatInterval;

/// log2(e) rounded up; used only for bit-size estimates, never for certificates.
pub const LOG2_E_UPPER: f64 = 1.442_695_040_888_963_5;

/// Estimated bit length of `e^x`.
pub fn exp_bits_estimate(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY) * LOG2_E_UPPER + 1.0
}

fn dyadic(num: BigInt, prec: u64) -> BigRational {
    BigRational::new(num, BigInt::one() << prec)
}

/// Fixed-point bounds `[lo, hi] / 2^prec` on `e^(x / 2^r)` for `x / 2^r <= 1/2`.
fn exp_small_fixed(x: &BigUint, r: u64, prec: u64) -> (BigInt, BigInt) {
    let x = BigInt::from(x.clone());
    let one = BigInt::one() << prec;
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut k: u64 = 0;
    // Each floor below loses at most one ulp, and the propagated error stays
    // below two ulps per term because the ratio x/2^r/k is at most 1/2.
    loop {
        k += 1;
        term = (&term * &x) / (BigInt::from(k) << r);
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    // term == 0 means the true next term is below 2 ulps; the geometric tail
    // beyond it is at most twice that.
    let slack = BigInt::from(2 * (k + 1) + 4);
    (sum.clone(), sum + slack)
}

/// Certified enclosure of `e^x` for a non-negative integer `x`, with about
/// `extra_bits` correct bits beyond the integer part.
pub fn exp_integer_bounds(x: &BigUint, extra_bits: u64) -> RatInterval {
    if x.is_zero() {
        return RatInterval::point(BigRational::one());
    }
    // Halve until x / 2^r <= 1/2.
    let r = x.bits() + 1;
    let int_bits = exp_bits_estimate(x).ceil() as u64;
    let prec = int_bits + extra_bits + 2 * r + 16;
    let (mut lo, mut hi) = exp_small_fixed(x, r, prec);
    for _ in 0..r {
        lo = (&lo * &lo) >> prec;
        let sq = &hi * &hi;
        let (q, rem) = sq.div_rem(&(BigInt::one() << prec));
        hi = if rem.is_zero() { q } else { q + 1 };
    }
    RatInterval::new(dyadic(lo, prec), dyadic(hi, prec))
}

/// `⌈e^x⌉` for a non-negative integer `x`, computed exactly.
///
/// `e^x` is irrational for `x > 0`, so the enclosure eventually isolates a
/// single integer interval; precision is doubled until it does.
pub fn ceil_exp(x: &BigUint) -> BigInt {
    if x.is_zero() {
        return BigInt::one();
    }
    let mut extra = 32u64;
    loop {
        let iv = exp_integer_bounds(x, extra);
        let flo = iv.lo().floor().to_integer();
        let fhi = iv.hi().floor().to_integer();
        if flo == fhi {
            return flo + 1;
        }
        extra *= 2;
    }
}

/// Fixed-point bounds on `2 atanh(num/den)` scaled by `2^prec`, for `0 <= num/den <= 1/3`.
fn two_atanh_fixed(num: &BigInt, den: &BigInt, prec: u64) -> (BigInt, BigInt) {
    debug_assert!(num.sign() != Sign::Minus);
    if num.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let guard = 8;
    let p = prec + guard;
    // z rounded down; z^2 rounded down.
    let z = (num << p) / den;
    let z2 = (&z * &z) >> p;
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k: u64 = 0;
    loop {
        k += 1;
        power = (&power * &z2) >> p;
        if power.is_zero() {
            break;
        }
        sum += &power / BigInt::from(2 * k + 1);
    }
    // Rounding of z itself: d/dz 2atanh(z) <= 2/(1 - 1/9) < 3 ulps; series
    // floors: at most 2 ulps per term; tail: below 2 ulps.
    let slack = BigInt::from(3 * k + 8);
    let lo = (&sum * 2) >> guard;
    let hi = ((sum + slack) * 2 >> guard) + 1;
    (lo, hi)
}

/// Certified enclosure of `ln 2` with absolute error below `2^-prec`.
pub fn ln2_bounds(prec: u64) -> RatInterval {
    let (lo, hi) = two_atanh_fixed(&BigInt::one(), &BigInt::from(3), prec + 2);
    RatInterval::new(dyadic(lo, prec + 2), dyadic(hi, prec + 2))
}

/// Certified enclosure of `ln n` for a positive integer `n`, absolute error
/// roughly `2^-prec` (scaled by the bit length of `n`).
pub fn ln_bounds(n: &BigUint, prec: u64) -> RatInterval {
    assert!(!n.is_zero(), "ln of zero");
    if n.is_one() {
        return RatInterval::point(BigRational::zero());
    }
    let bits = n.bits();
    // ln 2 is multiplied by up to `bits`, so carry log2(bits) guard bits.
    let p = prec + 16 + u64::from(64 - bits.leading_zeros());
    // n = m * 2^shift with m in [mant_lo, mant_lo + 1] (or exact when shift == 0).
    let mant_bits = p + 8;
    let (shift, mant_lo, exact) = if bits > mant_bits {
        let shift = bits - mant_bits;
        let m = BigInt::from(n >> shift);
        let exact = (BigInt::from(n.clone()) - (&m << shift)).is_zero();
        (shift, m, exact)
    } else {
        (0, BigInt::from(n.clone()), true)
    };
    let mant_hi = if exact { mant_lo.clone() } else { &mant_lo + 1 };
    // ln m = (b - 1) ln 2 + ln(m / 2^(b-1)), with m / 2^(b-1) in [1, 2].
    let ln_mant = |m: &BigInt| -> (BigInt, BigInt, u64) {
        let b = m.bits();
        let base = BigInt::one() << (b - 1);
        let num = m - &base;
        let den = m + &base;
        let (lo, hi) = two_atanh_fixed(&num, &den, p);
        (lo, hi, b - 1)
    };
    let (l_lo, _, e_lo) = ln_mant(&mant_lo);
    let (_, h_hi, e_hi) = ln_mant(&mant_hi);
    let ln2 = ln2_bounds(p + 16);
    let two_pow = BigInt::one() << p;
    let lo = BigRational::new(l_lo, two_pow.clone())
        + ln2.lo() * BigRational::from_integer(BigInt::from(e_lo + shift));
    let hi = BigRational::new(h_hi, two_pow)
        + ln2.hi() * BigRational::from_integer(BigInt::from(e_hi + shift));
    RatInterval::new(lo, hi)
}

/// Certified enclosure of `ln x` for a positive rational.
pub fn ln_rational_bounds(x: &BigRational, prec: u64) -> RatInterval {
    assert!(x.is_positive(), "ln of non-positive rational");
    let num = x.numer().magnitude().clone();
    let den = x.denom().magnitude().clone();
    ln_bounds(&num, prec).sub(&ln_bounds(&den, prec))
}

/// π enclosed by its first twenty decimals.
pub fn pi_bounds() -> RatInterval {
    let scale = BigInt::from(10u32).pow(20);
    let lo = BigInt::parse_bytes(b"314159265358979323846", 10).expect("literal");
    RatInterval::new(
        BigRational::new(lo.clone(), scale.clone()),
        BigRational::new(lo + 1, scale),
    )
}

/// `e^(-x)` enclosure for a non-negative integer `x` small enough to materialize.
pub fn exp_neg_integer_bounds(x: &BigUint, extra_bits: u64) -> RatInterval {
    exp_integer_bounds(x, extra_bits).recip()
}
