use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Samples of `x` on `[0, T]` with the constants of `x(t) ≤ a + b∫₀ᵗ x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallInstance {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl GronwallInstance {
    pub fn sample(f: impl Fn(f64) -> f64, t_max: f64, samples: usize, a: f64, b: f64) -> Self {
        let times: Vec<f64> = (0..=samples)
            .map(|k| t_max * k as f64 / samples as f64)
            .collect();
        let x = times.iter().map(|&t| f(t)).collect();
        Self { times, x, a, b }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    /// `min_t (a e^{bt} − x(t))`; negative means the conclusion failed.
    pub slack: f64,
    pub worst_time: f64,
    pub holds: bool,
}

/// Relative tolerance for floating-point comparisons of both sides.
const TOL: f64 = 1e-12;

/// Checks the hypothesis by trapezoidal quadrature, then `x(t) ≤ a e^{bt}`.
pub fn gronwall_check(inst: &GronwallInstance) -> Result<GronwallReport, AnalysisError> {
    let GronwallInstance { times, x, a, b } = inst;
    if times.len() != x.len() || times.is_empty() {
        return Err(AnalysisError::InvalidInput(
            "times and samples differ in length".into(),
        ));
    }
    if !(*a >= 0.0 && *b >= 0.0) {
        return Err(AnalysisError::InvalidInput(
            "a and b must be non-negative".into(),
        ));
    }
    if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::InvalidInput(
            "times must increase from 0".into(),
        ));
    }
    if x.iter().any(|v| !(*v >= 0.0)) {
        return Err(AnalysisError::InvalidInput("x must be non-negative".into()));
    }
    let mut integral = 0.0;
    let mut slack = f64::INFINITY;
    let mut worst_time = 0.0;
    for k in 0..times.len() {
        if k > 0 {
            integral += 0.5 * (times[k] - times[k - 1]) * (x[k] + x[k - 1]);
        }
        let rhs = a + b * integral;
        if x[k] > rhs + TOL * rhs.max(1.0) {
            return Err(AnalysisError::HypothesisViolated {
                t: times[k],
                x: x[k],
                rhs,
            });
        }
        let bound = a * (b * times[k]).exp();
        let s = bound - x[k];
        if s < slack {
            slack = s;
            worst_time = times[k];
        }
    }
    let scale = x.iter().fold(*a, |m, v| m.max(*v)).max(1.0);
    Ok(GronwallReport {
        slack,
        worst_time,
        holds: slack >= -TOL * scale,
    })
}
