use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::bounds::ln_bounds;
use super::interval::RatInterval;
use super::text;
use super::DiophantineError;

/// Enclosure of the complete quotient `x_{M+1}` that follows the last stored
/// partial quotient. `x_{M+1} >= 1` always.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBound {
    #[serde(with = "text::rational")]
    pub lower: BigRational,
    /// `None` means no finite upper bound is known.
    #[serde(with = "text::opt_rational", default)]
    pub upper: Option<BigRational>,
    /// Symbolic lower bound `x_{M+1} > e^E`, for tails too large to store.
    #[serde(with = "text::opt_bigint", default)]
    pub log_lower: Option<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// The expansion ends at depth M: the value is the rational `p_M / q_M`.
    Terminated,
    Bounded(TailBound),
}

/// `α = [a_0; a_1, ..., a_M, x_{M+1}]` with `x_{M+1}` enclosed by the tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    #[serde(with = "text::bigint")]
    pub integer_part: BigInt,
    #[serde(with = "text::bigint_vec")]
    pub partial_quotients: Vec<BigInt>,
    pub tail: Tail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    #[serde(with = "text::bigint")]
    pub p: BigInt,
    #[serde(with = "text::bigint")]
    pub q: BigInt,
    pub index: usize,
}

impl Convergent {
    pub fn as_rational(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// Certified enclosure of `{nα}`. `upper` may equal 1 when `nα` is only known
/// to lie just below an integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalPartEnclosure {
    #[serde(with = "text::bigint")]
    pub n: BigInt,
    #[serde(with = "text::rational")]
    pub lower: BigRational,
    #[serde(with = "text::rational")]
    pub upper: BigRational,
}

impl FractionalPartEnclosure {
    pub fn as_interval(&self) -> RatInterval {
        RatInterval::new(self.lower.clone(), self.upper.clone())
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }
}

/// Lower bound on `-ln|α - p_m/q_m|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NegLogGap {
    /// `α = p_m/q_m` exactly.
    Infinite,
    Finite(BigRational),
}

impl NegLogGap {
    /// True when this certifies `|α - p/q| < e^{-threshold}`.
    pub fn exceeds(&self, threshold: &BigRational) -> bool {
        match self {
            NegLogGap::Infinite => true,
            NegLogGap::Finite(v) => v > threshold,
        }
    }
}

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn ln_lo(n: &BigInt, prec: u64) -> BigRational {
    ln_bounds(n.magnitude(), prec).lo().clone()
}

impl ContinuedFraction {
    pub fn new(
        integer_part: BigInt,
        partial_quotients: Vec<BigInt>,
        tail: Tail,
    ) -> Result<Self, DiophantineError> {
        if let Some(i) = partial_quotients.iter().position(|a| !a.is_positive()) {
            return Err(DiophantineError::InvalidInput(format!(
                "partial quotient a_{} = {} is not positive",
                i + 1,
                partial_quotients[i]
            )));
        }
        if let Tail::Bounded(t) = &tail {
            if t.lower < BigRational::one() {
                return Err(DiophantineError::InvalidInput(
                    "tail lower bound must be at least 1".into(),
                ));
            }
            if let Some(u) = &t.upper {
                if u < &t.lower {
                    return Err(DiophantineError::InvalidInput(
                        "tail upper bound below lower bound".into(),
                    ));
                }
            }
            if t.log_lower.as_ref().is_some_and(|e| e.is_negative()) {
                return Err(DiophantineError::InvalidInput(
                    "negative logarithmic tail bound".into(),
                ));
            }
        }
        Ok(Self {
            integer_part,
            partial_quotients,
            tail,
        })
    }

    /// Finite expansion of a rational number.
    pub fn from_rational(r: &BigRational) -> Self {
        let mut num = r.numer().clone();
        let mut den = r.denom().clone();
        let (a0, rem) = num.div_mod_floor(&den);
        let mut quotients = Vec::new();
        num = rem;
        while !num.is_zero() {
            std::mem::swap(&mut num, &mut den);
            let (a, rem) = num.div_mod_floor(&den);
            quotients.push(a);
            num = rem;
        }
        Self {
            integer_part: a0,
            partial_quotients: quotients,
            tail: Tail::Terminated,
        }
    }

    /// `(√5 − 1)/2 = [0; 1, 1, ...]` to `depth` quotients.
    pub fn golden(depth: usize) -> Self {
        Self {
            integer_part: BigInt::zero(),
            partial_quotients: vec![BigInt::one(); depth],
            tail: Tail::Bounded(TailBound {
                lower: BigRational::new(1618.into(), 1000.into()),
                upper: Some(BigRational::new(1619.into(), 1000.into())),
                log_lower: None,
            }),
        }
    }

    /// Index M of the last stored partial quotient.
    pub fn depth(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.tail, Tail::Terminated)
    }

    /// `a_m`, with `a_0` the integer part.
    pub fn quotient(&self, m: usize) -> &BigInt {
        if m == 0 {
            &self.integer_part
        } else {
            &self.partial_quotients[m - 1]
        }
    }

    /// Convergents `p_m/q_m` for `m = 0..=depth`.
    pub fn convergents(&self, depth: usize) -> Result<Vec<Convergent>, DiophantineError> {
        if depth > self.depth() {
            return Err(DiophantineError::InsufficientExpansion {
                requested: depth,
                available: self.depth(),
            });
        }
        let mut out = Vec::with_capacity(depth + 1);
        let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
        let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
        for m in 0..=depth {
            let a = self.quotient(m);
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            out.push(Convergent {
                p: p.clone(),
                q: q.clone(),
                index: m,
            });
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
        }
        Ok(out)
    }

    pub fn all_convergents(&self) -> Vec<Convergent> {
        self.convergents(self.depth()).expect("depth is available")
    }

    /// `(p_{M-1}, q_{M-1})` and `(p_M, q_M)`, with `(1, 0)` standing in for `m = -1`.
    fn last_two(&self) -> ((BigInt, BigInt), (BigInt, BigInt)) {
        let c = self.all_convergents();
        let last = c.last().expect("m = 0 always present");
        let prev = if c.len() >= 2 {
            let x = &c[c.len() - 2];
            (x.p.clone(), x.q.clone())
        } else {
            (BigInt::one(), BigInt::zero())
        };
        (prev, (last.p.clone(), last.q.clone()))
    }

    /// Certified enclosure of α.
    pub fn value_enclosure(&self) -> RatInterval {
        let ((pp, qp), (p, q)) = self.last_two();
        let at = |x: &BigRational| -> BigRational {
            (x * rat(p.clone()) + rat(pp.clone())) / (x * rat(q.clone()) + rat(qp.clone()))
        };
        match &self.tail {
            Tail::Terminated => RatInterval::point(BigRational::new(p, q)),
            Tail::Bounded(t) => {
                let a = at(&t.lower);
                let b = match &t.upper {
                    Some(u) => at(u),
                    None => BigRational::new(p, q),
                };
                RatInterval::hull(a, b)
            }
        }
    }

    pub fn approx_f64(&self) -> f64 {
        self.value_enclosure()
            .midpoint()
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    /// Certified enclosure of `{nα}`.
    pub fn fractional_part_multiple(
        &self,
        n: &BigInt,
    ) -> Result<FractionalPartEnclosure, DiophantineError> {
        let iv = self.value_enclosure().scale(&rat(n.clone()));
        let k = iv.lo().floor().to_integer();
        let khi = iv.hi().floor().to_integer();
        let kr = rat(k.clone());
        let ok = if khi == k {
            true
        } else {
            // Touching the next integer from below is fine: {nα} -> 1.
            khi == &k + 1 && iv.hi() == &rat(khi.clone()) && iv.hi() > iv.lo()
        };
        if !ok {
            return Err(DiophantineError::InsufficientPrecision {
                n: n.to_string(),
                required_depth: self.required_depth_estimate(n),
            });
        }
        Ok(FractionalPartEnclosure {
            n: n.clone(),
            lower: iv.lo() - &kr,
            upper: iv.hi() - &kr,
        })
    }

    /// Rough depth at which `nα` would be resolved, using `q_m >= φ^m`-type growth.
    fn required_depth_estimate(&self, n: &BigInt) -> usize {
        let (_, (_, q)) = self.last_two();
        let lq = super::interval::log10_approx(&rat(q.clone())).max(0.0);
        let ln = super::interval::log10_approx(&rat(n.abs().max(BigInt::one()))) + 1.0;
        let deficit = (ln - 2.0 * lq).max(0.0);
        let per_step = 2.0 * 0.208_987_640_249_978_7; // 2 log10 φ
        self.depth() + (deficit / per_step).ceil() as usize + 1
    }

    /// The complete quotient `x_{m+1}` enclosed as an interval, for `m < M`
    /// or from the tail when `m == M`. `None` upper means unbounded.
    fn next_complete_quotient(&self, m: usize) -> (BigRational, Option<BigRational>) {
        let depth = self.depth();
        if m + 1 < depth {
            let a = rat(self.quotient(m + 1).clone());
            let b = &a + BigRational::one();
            (a, Some(b))
        } else if m + 1 == depth {
            let a = rat(self.quotient(m + 1).clone());
            match &self.tail {
                Tail::Terminated => (a.clone(), Some(a)),
                Tail::Bounded(t) => {
                    let hi = &a + t.lower.recip();
                    let lo = match &t.upper {
                        Some(u) => &a + u.recip(),
                        None => a,
                    };
                    (lo, Some(hi))
                }
            }
        } else {
            match &self.tail {
                Tail::Terminated => unreachable!("no quotient beyond a terminated expansion"),
                Tail::Bounded(t) => (t.lower.clone(), t.upper.clone()),
            }
        }
    }

    /// Enclosure of `|α − p_m/q_m|` from `1/(q_m (x_{m+1} q_m + q_{m-1}))`.
    pub fn gap_enclosure(&self, m: usize) -> Result<RatInterval, DiophantineError> {
        let conv = self.convergents(m)?;
        if m == self.depth() && self.is_rational() {
            return Ok(RatInterval::point(BigRational::zero()));
        }
        let q = rat(conv[m].q.clone());
        let qp = if m >= 1 {
            rat(conv[m - 1].q.clone())
        } else {
            BigRational::zero()
        };
        let (xl, xu) = self.next_complete_quotient(m);
        let g = |x: &BigRational| (&q * (x * &q + &qp)).recip();
        let upper = g(&xl);
        let lower = xu.map(|x| g(&x)).unwrap_or_else(BigRational::zero);
        Ok(RatInterval::new(lower, upper))
    }

    /// Certified lower bound on `-ln|α − p_m/q_m|` at `prec` bits.
    pub fn neg_log_gap(&self, m: usize, prec: u64) -> Result<NegLogGap, DiophantineError> {
        let conv = self.convergents(m)?;
        if m == self.depth() && self.is_rational() {
            return Ok(NegLogGap::Infinite);
        }
        let q = &conv[m].q;
        let qp = if m >= 1 {
            conv[m - 1].q.clone()
        } else {
            BigInt::zero()
        };
        let ln_q = ln_lo(q, prec);
        let (xl, _) = self.next_complete_quotient(m);
        // x_{m+1} q_m + q_{m-1} >= floor(xl q_m) + q_{m-1}
        let denom_lo = (&xl * rat(q.clone())).floor().to_integer() + &qp;
        let mut best = &ln_q + ln_lo(&denom_lo, prec);
        if m == self.depth() {
            if let Tail::Bounded(TailBound {
                log_lower: Some(e), ..
            }) = &self.tail
            {
                let alt = rat(e.clone()) + &ln_q + &ln_q;
                if alt > best {
                    best = alt;
                }
            }
        }
        Ok(NegLogGap::Finite(best))
    }

    /// Certifies `|α − p_m/q_m| < e^{-threshold}`, refining precision when close.
    pub fn certify_gap_below_exp(
        &self,
        m: usize,
        threshold: &BigRational,
    ) -> Result<bool, DiophantineError> {
        let mut prec = 64;
        loop {
            let v = self.neg_log_gap(m, prec)?;
            if v.exceeds(threshold) {
                return Ok(true);
            }
            if prec >= 1024 {
                return Ok(false);
            }
            let NegLogGap::Finite(x) = &v else {
                unreachable!()
            };
            // Far below the threshold: more bits will not help.
            let slack = (threshold - x).to_f64().unwrap_or(f64::INFINITY);
            if slack > 1e-6 {
                return Ok(false);
            }
            prec *= 4;
        }
    }

    /// Direction of `q_m α − p_m`: even m approach from below.
    pub fn approaches_from_below(m: usize) -> bool {
        m % 2 == 0
    }

    /// Bit size of the largest stored partial quotient.
    pub fn max_quotient_bits(&self) -> u64 {
        self.partial_quotients
            .iter()
            .map(|a| a.bits())
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn biguint_of(n: &BigInt) -> BigUint {
    n.magnitude().clone()
}
