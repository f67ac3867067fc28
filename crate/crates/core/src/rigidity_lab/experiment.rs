//! Orchestration: α → rigidity sequence → flow distances → Floer solves →
//! constants → report rows.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{c0_distances, gronwall_sweep, theoretical_bound, ProbeGrid, RigidityError};
use crate::analysis_checks::estimate_sobolev_constant;
use crate::diophantine::bounds::pi_bounds;
use crate::diophantine::interval::{format_sci, round_up};
use crate::diophantine::{
    construct_lstar, rigidity_sequence, ContinuedFraction, RigidityEntry, DEFAULT_BIT_BUDGET,
};
use crate::floer_solver::{
    choose_truncation, energy::w1_inf_s_derivative, solve_floer, CylinderGrid, SolverConfig,
};
use crate::hamiltonian_disk::{hessian_bound, Bump, FlowConfig, Hamiltonian, HessianGrid, Stage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSpec {
    /// Seed `[a_0; a_1, …]` as decimal strings, extended by the exponential rule.
    Lstar {
        seed: Vec<String>,
        depth: usize,
        #[serde(default = "default_budget")]
        budget_bits: u64,
    },
    /// A full continued fraction record.
    Explicit {
        cf: ContinuedFraction,
    },
    Golden {
        depth: usize,
    },
}

fn default_budget() -> u64 {
    DEFAULT_BIT_BUDGET
}

impl AlphaSpec {
    pub fn build(&self) -> Result<ContinuedFraction, RigidityError> {
        match self {
            AlphaSpec::Lstar {
                seed,
                depth,
                budget_bits,
            } => {
                let seed = seed
                    .iter()
                    .map(|s| {
                        s.trim()
                            .parse::<BigInt>()
                            .map_err(|_| RigidityError::Config(format!("bad seed quotient {s:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(construct_lstar(*depth, &seed, *budget_bits)?)
            }
            AlphaSpec::Explicit { cf } => Ok(cf.clone()),
            AlphaSpec::Golden { depth } => Ok(ContinuedFraction::golden(*depth)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Rigid,
    Perturbed {
        epsilon: f64,
        #[serde(default = "Bump::standard_set")]
        bumps: Vec<Bump>,
    },
    Staged {
        stages: Vec<Stage>,
    },
}

impl FamilySpec {
    pub fn build(&self, alpha: f64) -> Result<Hamiltonian, RigidityError> {
        let h = match self {
            FamilySpec::Rigid => Hamiltonian::rigid(alpha),
            FamilySpec::Perturbed { epsilon, bumps } => {
                Hamiltonian::perturbed(alpha, *epsilon, bumps.clone())
            }
            FamilySpec::Staged { stages } => Hamiltonian::Staged {
                alpha,
                stages: stages.clone(),
            },
        };
        h.validate()?;
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloerStage {
    pub enabled: bool,
    pub ns: usize,
    pub nt: usize,
    pub tail_tol: f64,
    pub s_cap: f64,
    /// Largest admissible `S / ns`; coarser grids cannot resolve the
    /// boundary layer of a perturbed solution.
    pub max_hs: f64,
    /// Rows with `n` above this are flow-only.
    pub max_n: u64,
    /// Periods to solve; each must occur in the rigidity sequence. Empty
    /// means every entry with `n ≤ max_n`.
    pub n_values: Vec<u64>,
    /// Start columns per row in the Gronwall sweep; 0 disables it.
    pub gronwall_starts: usize,
    pub solver: SolverConfig,
}

impl Default for FloerStage {
    fn default() -> Self {
        Self {
            enabled: true,
            ns: 256,
            nt: 128,
            tail_tol: 0.1,
            s_cap: 1e6,
            max_hs: 0.5,
            max_n: 16,
            n_values: Vec::new(),
            gronwall_starts: 2,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevStage {
    pub n_list: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SobolevStage {
    fn default() -> Self {
        Self {
            n_list: vec![1, 4, 16],
            trials: 100,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityConfig {
    pub alpha: AlphaSpec,
    pub family: FamilySpec,
    /// Number `J` of rigidity-sequence entries.
    pub count: u64,
    #[serde(default)]
    pub probe: ProbeGrid,
    #[serde(default)]
    pub flow: FlowConfig,
    /// Rows with `n` above this are not flowed.
    #[serde(default = "default_max_flow_n")]
    pub max_flow_n: u64,
    #[serde(default)]
    pub hessian: HessianGrid,
    #[serde(default)]
    pub floer: FloerStage,
    #[serde(default)]
    pub sobolev: SobolevStage,
}

fn default_max_flow_n() -> u64 {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityRow {
    pub j: u64,
    pub n: String,
    pub inverse: bool,
    /// Outward-rounded decimal endpoints of the `{nα}` enclosure.
    pub frac_lo: String,
    pub frac_hi: String,
    /// Upper end of the small quantity (`{nα}` or `1 − {nα}`).
    pub small_hi: String,
    /// Max displacement over the probe grid, when flowed.
    pub measured_d: Option<f64>,
    /// Certified upper bound on the distance, rigid family only.
    pub certified_d_upper: Option<String>,
    pub inflation: Option<f64>,
    pub bound: Option<f64>,
    pub ln_bound: Option<f64>,
    pub m: Option<f64>,
    pub b_hess: f64,
    pub b_sol: Option<f64>,
    pub c: Option<f64>,
    pub floer_residual: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub alpha: ContinuedFraction,
    pub alpha_hat: f64,
    pub family: String,
    pub hessian_b: f64,
    pub c_empirical: Option<f64>,
    pub sequence_shortfall: Option<String>,
    pub rows: Vec<RigidityRow>,
}

/// Certified `2|sin(π x)| ≤ 2π x` for the small quantity `x`.
fn certified_chord(e: &RigidityEntry) -> BigRational {
    BigRational::from_integer(2.into()) * pi_bounds().hi() * e.small.hi()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

impl RigidityReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,n,frac_lo,frac_hi,measured_d,bound,M,B,flags")?;
        for r in &self.rows {
            let measured = match (&r.measured_d, &r.certified_d_upper) {
                (Some(d), _) => format!("{d:.6e}"),
                (None, Some(c)) => c.clone(),
                _ => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{:.6e},{}",
                r.j,
                r.n,
                r.frac_lo,
                r.frac_hi,
                measured,
                fmt_opt(r.bound),
                fmt_opt(r.m),
                r.b_hess,
                r.flags.join(";")
            )?;
        }
        Ok(())
    }

    /// `n, log10 measured, log10 bound` for plotting; empty cells when absent.
    pub fn write_plot_data<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,log10_measured,log10_certified,log10_bound")?;
        for r in &self.rows {
            let cert_log = r.certified_d_upper.as_deref().map(log10_sci);
            writeln!(
                w,
                "{},{},{},{}",
                r.n,
                fmt_opt(r.measured_d.filter(|d| *d > 0.0).map(f64::log10)),
                fmt_opt(cert_log),
                fmt_opt(r.ln_bound.map(|l| l / std::f64::consts::LN_10)),
            )?;
        }
        Ok(())
    }
}

/// `log10` of a value printed as `d.ddde±x`.
fn log10_sci(s: &str) -> f64 {
    match s.split_once('e') {
        Some((m, e)) => {
            m.parse::<f64>().unwrap_or(f64::NAN).log10() + e.parse::<f64>().unwrap_or(f64::NAN)
        }
        None => s.parse::<f64>().unwrap_or(f64::NAN).log10(),
    }
}

pub fn run_rigidity_experiment(cfg: &RigidityConfig) -> Result<RigidityReport, RigidityError> {
    if !(cfg.probe.h > 0.0 && cfg.probe.h <= 1.0) {
        return Err(RigidityError::Config(format!(
            "probe.h = {} not in (0, 1]",
            cfg.probe.h
        )));
    }
    let cf = cfg.alpha.build()?;
    let alpha_hat = cf.approx_f64();
    let h = cfg.family.build(alpha_hat)?;
    let seq = rigidity_sequence(&cf, cfg.count)?;
    let hess = hessian_bound(&h, cfg.hessian);
    let need_floer = cfg.floer.enabled
        && seq
            .entries
            .iter()
            .any(|e| e.n <= BigInt::from(cfg.floer.max_n));
    let c = if need_floer {
        Some(
            estimate_sobolev_constant(
                true,
                &cfg.sobolev.n_list,
                cfg.sobolev.trials,
                cfg.sobolev.seed,
            )?
            .c_empirical,
        )
    } else {
        None
    };
    let flow_ns: Vec<u64> = seq
        .entries
        .iter()
        .filter_map(|e| e.n.to_u64())
        .filter(|n| *n <= cfg.max_flow_n)
        .collect();
    let distances = c0_distances(&h, &flow_ns, &cfg.probe, hess.b, &cfg.flow)?;
    let alpha_iv = cf.value_enclosure();

    let mut rows = Vec::with_capacity(seq.entries.len());
    for e in &seq.entries {
        let mut flags = Vec::new();
        if e.inverse {
            flags.push("inverse".to_string());
        }
        let n_small = e.n.to_u64();
        let dist = n_small.and_then(|n| distances.iter().find(|d| d.n == n));
        if dist.is_none() {
            flags.push("not_flowed".into());
        }
        let certified_d_upper = matches!(cfg.family, FamilySpec::Rigid).then(|| {
            flags.push("certified".into());
            format_sci(&certified_chord(e), 4, true)
        });
        let frac_lo = format_sci(e.fractional_part.lo(), 6, false);
        let frac_hi = format_sci(e.fractional_part.hi(), 6, true);
        let small_hi = format_sci(e.small.hi(), 6, true);

        let mut row = RigidityRow {
            j: e.j,
            n: e.n.to_string(),
            inverse: e.inverse,
            frac_lo,
            frac_hi,
            small_hi,
            measured_d: dist.map(|d| d.measured),
            certified_d_upper,
            inflation: dist.map(|d| d.inflation),
            bound: None,
            ln_bound: None,
            m: None,
            b_hess: hess.b,
            b_sol: None,
            c,
            floer_residual: None,
            flags,
        };

        let floer_n = n_small
            .filter(|n| cfg.floer.enabled && *n <= cfg.floer.max_n)
            .filter(|n| cfg.floer.n_values.is_empty() || cfg.floer.n_values.contains(n))
            .and_then(|n| u32::try_from(n).ok());
        match floer_n {
            None => row.flags.push("bound_unavailable".into()),
            Some(n) => floer_row(cfg, e, n, &h, &alpha_iv, hess.b, c, &mut row)?,
        }
        rows.push(row);
    }
    Ok(RigidityReport {
        alpha: cf,
        alpha_hat,
        family: h.tag().to_string(),
        hessian_b: hess.b,
        c_empirical: c,
        sequence_shortfall: seq.shortfall,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn floer_row(
    cfg: &RigidityConfig,
    e: &RigidityEntry,
    n: u32,
    h: &Hamiltonian,
    alpha_iv: &crate::diophantine::RatInterval,
    b_hess: f64,
    c: Option<f64>,
    row: &mut RigidityRow,
) -> Result<(), RigidityError> {
    // Solutions of the inverse map see {n(−α)} = 1 − {nα}.
    let (h_used, alpha_used) = if e.inverse {
        (h.inverse(), alpha_iv.neg())
    } else {
        (h.clone(), alpha_iv.clone())
    };
    let small = round_up(e.small.hi());
    let trunc = choose_truncation(small, n, cfg.floer.tail_tol, cfg.floer.s_cap);
    if !trunc.feasible || small == 0.0 || trunc.s_max / cfg.floer.ns as f64 > cfg.floer.max_hs {
        row.flags.push("floer_infeasible".into());
        row.flags.push("bound_unavailable".into());
        return Ok(());
    }
    let grid = CylinderGrid::new(n, trunc.s_max, cfg.floer.ns, cfg.floer.nt)?;
    let sol = solve_floer(&h_used, n, &alpha_used, &grid, None, &cfg.floer.solver)?;
    row.floer_residual = Some(sol.residual_norm);
    if !sol.converged {
        row.flags.push("floer_not_converged".into());
        row.flags.push("bound_unavailable".into());
        return Ok(());
    }
    if cfg.floer.gronwall_starts > 0 {
        let sweep = gronwall_sweep(&sol, b_hess, cfg.floer.gronwall_starts, &cfg.flow)?;
        let count: usize = sweep.iter().map(|g| g.violations).sum();
        if count > 0 {
            let worst = sweep
                .iter()
                .map(|g| g.min_slack)
                .fold(f64::INFINITY, f64::min);
            return Err(RigidityError::GronwallViolation { count, worst });
        }
        row.flags.push("gronwall_ok".into());
    }
    let c = c.expect("Sobolev constant computed when a Floer row exists");
    let b_sol = w1_inf_s_derivative(&sol);
    let m = (c * b_sol).sqrt() * std::f64::consts::PI.powf(0.25);
    let bound = theoretical_bound(m, b_hess, e.small.hi(), n as u64);
    row.b_sol = Some(b_sol);
    row.m = Some(m);
    row.bound = Some(bound.value);
    row.ln_bound = Some(bound.ln_value);
    row.flags.push("c_empirical".into());
    if bound.vacuous {
        row.flags.push("bound_vacuous".into());
    }
    Ok(())
}
