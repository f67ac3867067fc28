//! Exact and certified arithmetic for irrational rotation numbers.

pub mod bounds;
pub mod continued_fraction;
pub mod interval;
pub mod lstar;
pub mod text;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use continued_fraction::{
    ContinuedFraction, Convergent, FractionalPartEnclosure, NegLogGap, Tail, TailBound,
};
pub use interval::RatInterval;
pub use lstar::{
    approximate_in_lstar, classify_diophantine_evidence, construct_lstar, rigidity_sequence,
    verify_lstar_witness, EvidenceLine, EvidenceReport, LStarWitness, RigidityEntry,
    RigiditySequence, WitnessOutcome, DEFAULT_BIT_BUDGET,
};

#[derive(Debug, Error)]
pub enum DiophantineError {
    #[error("expansion has {available} partial quotients, {requested} requested")]
    InsufficientExpansion { requested: usize, available: usize },
    #[error("enclosure of n·α for n = {n} is not resolved; about {required_depth} partial quotients needed")]
    InsufficientPrecision { n: String, required_depth: usize },
    #[error(
        "partial quotients exceed the {budget_bits}-bit budget beyond depth {achievable_depth}"
    )]
    BudgetExceeded {
        achievable_depth: usize,
        budget_bits: u64,
        partial: Box<ContinuedFraction>,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("record format: {0}")]
    Format(String),
}

/// Structured text record (TOML) for any of the module's value types.
pub fn to_record<T: Serialize>(value: &T) -> Result<String, DiophantineError> {
    toml::to_string(value).map_err(|e| DiophantineError::Format(e.to_string()))
}

pub fn from_record<T: DeserializeOwned>(text: &str) -> Result<T, DiophantineError> {
    toml::from_str(text).map_err(|e| DiophantineError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn records_round_trip() {
        let seed = [BigInt::from(0), BigInt::from(3)];
        let cf = construct_lstar(3, &seed, DEFAULT_BIT_BUDGET).unwrap();
        let text = to_record(&cf).unwrap();
        assert!(text.contains("partial_quotients"));
        let back: ContinuedFraction = from_record(&text).unwrap();
        assert_eq!(back, cf);

        let w = verify_lstar_witness(&cf, 2).unwrap();
        let text = to_record(&w).unwrap();
        let back: WitnessOutcome = from_record(&text).unwrap();
        assert_eq!(back, w);

        let g = ContinuedFraction::golden(4);
        let back: ContinuedFraction = from_record(&to_record(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
