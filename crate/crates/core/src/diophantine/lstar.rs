//! The exponential Liouville class: construction, witnesses, rigidity times.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::bounds::{ceil_exp, exp_bits_estimate};
use super::continued_fraction::{biguint_of, ContinuedFraction, NegLogGap, Tail, TailBound};
use super::interval::RatInterval;
use super::text;
use super::DiophantineError;

pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LStarWitness {
    pub k: u64,
    #[serde(with = "text::bigint")]
    pub p: BigInt,
    #[serde(with = "text::bigint")]
    pub q: BigInt,
    pub index: usize,
    /// Encloses `|α − p/q|`; the upper end can be loose when the tail is symbolic.
    pub certified_gap: RatInterval,
    /// Certified lower bound on `-ln|α − p/q|`, `None` when `α = p/q`.
    #[serde(with = "text::opt_rational", default)]
    pub neg_log_gap_lower: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WitnessOutcome {
    Certified(LStarWitness),
    /// Nothing certified up to `searched_depth`; says nothing about deeper levels.
    NotCertified {
        k: u64,
        searched_depth: usize,
    },
}

impl WitnessOutcome {
    pub fn witness(&self) -> Option<&LStarWitness> {
        match self {
            WitnessOutcome::Certified(w) => Some(w),
            WitnessOutcome::NotCertified { .. } => None,
        }
    }
}

fn rat_u(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rule_exponent(m: usize, q: &BigInt) -> BigUint {
    BigUint::from(m) * biguint_of(q)
}

/// Quotient `⌈e^E⌉`, or `None` when it would exceed `budget_bits`.
fn rule_quotient(e: &BigUint, budget_bits: u64) -> Option<BigInt> {
    if exp_bits_estimate(e) > budget_bits as f64 {
        None
    } else {
        Some(ceil_exp(e))
    }
}

/// Tail for an expansion that keeps following the rule beyond depth M.
fn rule_tail(m: usize, q: &BigInt, budget_bits: u64) -> Tail {
    let e = rule_exponent(m, q);
    match rule_quotient(&e, budget_bits) {
        Some(a) => Tail::Bounded(TailBound {
            lower: BigRational::from_integer(a.clone()),
            upper: Some(BigRational::from_integer(a + 1)),
            log_lower: Some(BigInt::from(e)),
        }),
        None => Tail::Bounded(TailBound {
            lower: BigRational::one(),
            upper: None,
            log_lower: Some(BigInt::from(e)),
        }),
    }
}

fn extend_by_rule(
    integer_part: BigInt,
    mut quotients: Vec<BigInt>,
    target_depth: usize,
    budget_bits: u64,
) -> Result<ContinuedFraction, DiophantineError> {
    let seed = ContinuedFraction::new(integer_part.clone(), quotients.clone(), Tail::Terminated)?;
    let conv = seed.all_convergents();
    let mut q1 = conv.last().expect("m = 0").q.clone();
    let mut q2 = if conv.len() >= 2 {
        conv[conv.len() - 2].q.clone()
    } else {
        BigInt::zero()
    };
    while quotients.len() < target_depth {
        let m = quotients.len();
        let e = rule_exponent(m, &q1);
        let Some(a) = rule_quotient(&e, budget_bits) else {
            let tail = Tail::Bounded(TailBound {
                lower: BigRational::one(),
                upper: None,
                log_lower: Some(BigInt::from(e)),
            });
            let partial = ContinuedFraction::new(integer_part, quotients, tail)?;
            return Err(DiophantineError::BudgetExceeded {
                achievable_depth: m,
                budget_bits,
                partial: Box::new(partial),
            });
        };
        let q = &a * &q1 + &q2;
        quotients.push(a);
        q2 = std::mem::replace(&mut q1, q);
    }
    let m = quotients.len();
    let tail = rule_tail(m, &q1, budget_bits);
    ContinuedFraction::new(integer_part, quotients, tail)
}

/// Extends `seed = [a_0; a_1, ..., a_L]` with `a_{m+1} = ⌈e^{m q_m}⌉` until
/// the last stored quotient has index `depth`. The tail records the next
/// rule quotient, exactly when it fits in the bit budget and symbolically
/// otherwise.
pub fn construct_lstar(
    depth: usize,
    seed: &[BigInt],
    budget_bits: u64,
) -> Result<ContinuedFraction, DiophantineError> {
    let Some((a0, rest)) = seed.split_first() else {
        return Err(DiophantineError::InvalidInput("empty seed".into()));
    };
    extend_by_rule(a0.clone(), rest.to_vec(), depth, budget_bits)
}

fn witness_at(
    cf: &ContinuedFraction,
    m: usize,
    k: u64,
) -> Result<Option<LStarWitness>, DiophantineError> {
    let conv = cf.convergents(m)?;
    let c = &conv[m];
    let threshold = rat_u(k) * BigRational::from_integer(c.q.clone());
    if !cf.certify_gap_below_exp(m, &threshold)? {
        return Ok(None);
    }
    let neg_log = match cf.neg_log_gap(m, 256)? {
        NegLogGap::Infinite => None,
        NegLogGap::Finite(v) => Some(v),
    };
    Ok(Some(LStarWitness {
        k,
        p: c.p.clone(),
        q: c.q.clone(),
        index: m,
        certified_gap: cf.gap_enclosure(m)?,
        neg_log_gap_lower: neg_log,
    }))
}

/// Smallest-q convergent (index ≥ 1) with certified `|α − p/q| < e^{−kq}`.
pub fn verify_lstar_witness(
    cf: &ContinuedFraction,
    k: u64,
) -> Result<WitnessOutcome, DiophantineError> {
    for m in 1..=cf.depth() {
        if let Some(w) = witness_at(cf, m, k)? {
            return Ok(WitnessOutcome::Certified(w));
        }
    }
    Ok(WitnessOutcome::NotCertified {
        k,
        searched_depth: cf.depth(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityEntry {
    pub j: u64,
    #[serde(with = "text::bigint")]
    pub n: BigInt,
    pub index: usize,
    pub fractional_part: RatInterval,
    /// True when `1 − {nα}` is the small quantity, i.e. the entry belongs to
    /// the inverse map.
    pub inverse: bool,
    /// Enclosure of the small quantity: `{nα}`, or `1 − {nα}` when inverse.
    pub small: RatInterval,
    /// Certified lower bound on `-ln(small)`, `None` when `small == 0`.
    #[serde(with = "text::opt_rational", default)]
    pub neg_log_small_lower: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigiditySequence {
    pub entries: Vec<RigidityEntry>,
    pub requested: u64,
    /// Why the sequence stops short of `requested`, if it does.
    pub shortfall: Option<String>,
}

impl RigiditySequence {
    pub fn is_complete(&self) -> bool {
        self.shortfall.is_none()
    }
}

fn rigidity_entry(
    cf: &ContinuedFraction,
    j: u64,
    m: usize,
) -> Result<Option<RigidityEntry>, DiophantineError> {
    let Some(w) = witness_at(cf, m, j)? else {
        return Ok(None);
    };
    let inverse = !ContinuedFraction::approaches_from_below(m);
    let frac = cf.fractional_part_multiple(&w.q)?;
    let small = if inverse {
        RatInterval::new(
            BigRational::one() - &frac.upper,
            BigRational::one() - &frac.lower,
        )
    } else {
        frac.as_interval()
    };
    // {qα} or 1 − {qα} equals q·|α − p/q|, so -ln(small) >= -ln(gap) - ln q.
    let ln_q = super::bounds::ln_bounds(&biguint_of(&w.q), 256);
    let neg_log_small = w.neg_log_gap_lower.map(|g| g - ln_q.hi());
    Ok(Some(RigidityEntry {
        j,
        n: w.q,
        index: m,
        fractional_part: frac.as_interval(),
        inverse,
        small,
        neg_log_small_lower: neg_log_small,
    }))
}

/// For `j = 1..=J`, the smallest convergent denominator `n` with certified
/// `{nα} ≤ n e^{−jn}`. The direct side (`{nα}` small) is preferred; the
/// inverse side (`1 − {nα}` small) is used only when no direct witness exists.
pub fn rigidity_sequence(
    cf: &ContinuedFraction,
    count: u64,
) -> Result<RigiditySequence, DiophantineError> {
    let mut entries = Vec::new();
    let mut shortfall = None;
    'outer: for j in 1..=count {
        for inverse_pass in [false, true] {
            for m in 1..=cf.depth() {
                if ContinuedFraction::approaches_from_below(m) == inverse_pass {
                    continue;
                }
                if let Some(e) = rigidity_entry(cf, j, m)? {
                    entries.push(e);
                    continue 'outer;
                }
            }
        }
        shortfall = Some(format!(
            "no convergent up to depth {} certifies {{nα}} ≤ n·e^(-{j}n); \
             {} of {count} entries found",
            cf.depth(),
            j - 1
        ));
        break;
    }
    Ok(RigiditySequence {
        entries,
        requested: count,
        shortfall,
    })
}

/// An element of the class within `epsilon` of `target`: the expansion of
/// `target` followed by a quotient large enough to stay within `epsilon`,
/// then the exponential rule until witnesses exist for every `k <= depth`.
pub fn approximate_in_lstar(
    target: &BigRational,
    epsilon: &BigRational,
    depth: usize,
    budget_bits: u64,
) -> Result<ContinuedFraction, DiophantineError> {
    if !epsilon.is_positive() {
        return Err(DiophantineError::InvalidInput(
            "epsilon must be positive".into(),
        ));
    }
    let seed = ContinuedFraction::from_rational(target);
    let l = seed.depth();
    let q_l = seed.all_convergents()[l].q.clone();
    let e = rule_exponent(l, &q_l);
    let rule = rule_quotient(&e, budget_bits).ok_or_else(|| DiophantineError::BudgetExceeded {
        achievable_depth: l,
        budget_bits,
        partial: Box::new(seed.clone()),
    })?;
    // |α − p_L/q_L| < 1/(q_L^2 a_{L+1}) < epsilon
    let q2 = BigRational::from_integer(&q_l * &q_l);
    let guard = (epsilon * q2).recip().ceil().to_integer() + 1;
    let first = rule.max(guard);
    let mut quotients = seed.partial_quotients.clone();
    quotients.push(first);
    // Level m certifies every k <= m, and the tail certifies level M.
    extend_by_rule(
        seed.integer_part.clone(),
        quotients,
        (l + 1).max(depth),
        budget_bits,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceLine {
    pub k: u64,
    pub present: bool,
    /// Denominator of the first certified convergent, if any.
    #[serde(with = "text::opt_bigint", default)]
    pub q: Option<BigInt>,
    pub index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub depth: usize,
    /// Convergent indices examined: the deeper half of `1..=depth`, `q >= 2`.
    pub window_start: usize,
    pub lines: Vec<EvidenceLine>,
    pub note: String,
}

/// For each `k <= k_max`, whether some convergent in the deeper half of the
/// expansion has certified `|α − p/q| < q^{−k}`. Finite-depth evidence only.
pub fn classify_diophantine_evidence(
    cf: &ContinuedFraction,
    k_max: u64,
    depth: usize,
) -> Result<EvidenceReport, DiophantineError> {
    let depth = depth.min(cf.depth());
    let start = depth.div_ceil(2).max(1);
    let conv = cf.convergents(depth)?;
    let mut lines = Vec::new();
    for k in 1..=k_max {
        let mut hit = None;
        for m in start..=depth {
            let q = &conv[m].q;
            if q < &BigInt::from(2) {
                continue;
            }
            let ln_q = super::bounds::ln_bounds(&biguint_of(q), 128);
            let threshold = rat_u(k) * ln_q.hi();
            if cf.neg_log_gap(m, 128)?.exceeds(&threshold) {
                hit = Some((q.clone(), m));
                break;
            }
        }
        lines.push(EvidenceLine {
            k,
            present: hit.is_some(),
            q: hit.as_ref().map(|h| h.0.clone()),
            index: hit.map(|h| h.1),
        });
    }
    Ok(EvidenceReport {
        depth,
        window_start: start,
        lines,
        note: format!(
            "evidence at finite depth {depth}; absence is not a proof of a Diophantine condition"
        ),
    })
}
