//! Sobolev interpolation ratios on planes and cylinders, and the Gronwall lemma.

pub mod gronwall;
pub mod sobolev;

use thiserror::Error;

pub use gronwall::{gronwall_check, GronwallInstance, GronwallReport};
pub use sobolev::{
    cutoff_chain, estimate_sobolev_constant, sobolev_ratio, CutoffChain, Domain, ProbeNorms,
    Profile, SobolevProbe, SobolevRow, SobolevTable, CYLINDER_BOUND, PLANE_BOUND,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("degenerate probe: f vanishes identically")]
    Degenerate,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("hypothesis x(t) <= a + b∫x fails at t = {t}: x = {x}, right side = {rhs}")]
    HypothesisViolated { t: f64, x: f64, rhs: f64 },
}
