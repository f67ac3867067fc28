//! Experiment configuration: TOML with decimal strings for big numbers.
//!
//! Each top-level section is decoded on its own so that every broken section
//! is reported, then value ranges and cross-references are checked.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diophantine::{rigidity_sequence, DEFAULT_BIT_BUDGET};
use crate::hamiltonian_disk::{FlowConfig, HessianGrid};
use crate::rigidity_lab::{
    AlphaSpec, FamilySpec, FloerStage, ProbeGrid, RigidityConfig, Sector, SobolevStage,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Missing {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema violations:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),
    #[error("inconsistent configuration:\n  {}", .0.join("\n  "))]
    Inconsistent(Vec<String>),
}

impl ConfigError {
    pub fn violations(&self) -> Vec<String> {
        match self {
            ConfigError::Missing { .. } => vec![self.to_string()],
            ConfigError::Schema(v) | ConfigError::Inconsistent(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigiditySection {
    /// Number `J` of rigidity-sequence entries.
    pub count: u64,
    pub max_flow_n: u64,
}

impl Default for RigiditySection {
    fn default() -> Self {
        Self {
            count: 1,
            max_flow_n: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingSection {
    pub enabled: bool,
    pub samples: usize,
    /// Empty means the flowed rigidity-sequence periods.
    pub n_values: Vec<u64>,
    pub a: Vec<Sector>,
    pub b: Vec<Sector>,
}

impl Default for MixingSection {
    fn default() -> Self {
        // Chord between the inner corners is 0.202.
        let d = (0.202f64 / 0.8).asin();
        let pi = std::f64::consts::PI;
        Self {
            enabled: true,
            samples: 100_000,
            n_values: Vec::new(),
            a: vec![Sector {
                r0: 0.4,
                r1: 1.0,
                theta0: d,
                theta1: pi - d,
            }],
            b: vec![Sector {
                r0: 0.4,
                r1: 1.0,
                theta0: pi + d,
                theta1: 2.0 * pi - d,
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("prlab-out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Seed for every Monte Carlo stage.
    pub seed: u64,
    pub alpha: AlphaSpec,
    pub family: FamilySpec,
    pub rigidity: RigiditySection,
    pub probe: ProbeGrid,
    pub flow: FlowConfig,
    pub hessian: HessianGrid,
    pub floer: FloerStage,
    pub sobolev: SobolevStage,
    pub mixing: MixingSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            alpha: AlphaSpec::Lstar {
                seed: vec!["0".into(), "3".into()],
                depth: 2,
                budget_bits: DEFAULT_BIT_BUDGET,
            },
            family: FamilySpec::Rigid,
            rigidity: RigiditySection::default(),
            probe: ProbeGrid::default(),
            flow: FlowConfig::default(),
            hessian: HessianGrid::default(),
            floer: FloerStage::default(),
            sobolev: SobolevStage::default(),
            mixing: MixingSection::default(),
            output: OutputSection::default(),
        }
    }
}

const SECTIONS: [&str; 11] = [
    "seed", "alpha", "family", "rigidity", "probe", "flow", "hessian", "floer", "sobolev",
    "mixing", "output",
];

fn section<T: DeserializeOwned + Default>(
    table: &toml::Table,
    key: &str,
    required: bool,
    errors: &mut Vec<String>,
) -> Option<T> {
    match table.get(key) {
        None if required => {
            errors.push(format!("{key}: missing required section"));
            None
        }
        None => Some(T::default()),
        Some(v) => match v.clone().try_into::<T>() {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("{key}: {}", e.to_string().trim()));
                None
            }
        },
    }
}

fn required<T: DeserializeOwned>(
    table: &toml::Table,
    key: &str,
    errors: &mut Vec<String>,
) -> Option<T> {
    match table.get(key) {
        None => {
            errors.push(format!("{key}: missing required section"));
            None
        }
        Some(v) => v
            .clone()
            .try_into::<T>()
            .map_err(|e| errors.push(format!("{key}: {}", e.to_string().trim())))
            .ok(),
    }
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| ConfigError::Schema(vec![e.to_string().trim().into()]))?;
    let mut errors = Vec::new();
    for k in table.keys() {
        if !SECTIONS.contains(&k.as_str()) {
            errors.push(format!("{k}: unknown section"));
        }
    }
    let seed = match table.get("seed") {
        None => Some(ExperimentConfig::default().seed),
        Some(toml::Value::Integer(i)) if *i >= 0 => Some(*i as u64),
        Some(v) => {
            errors.push(format!("seed: expected a non-negative integer, found {v}"));
            None
        }
    };
    let alpha = required::<AlphaSpec>(&table, "alpha", &mut errors);
    let family = required::<FamilySpec>(&table, "family", &mut errors);
    let rigidity = section::<RigiditySection>(&table, "rigidity", false, &mut errors);
    let probe = section::<ProbeGrid>(&table, "probe", false, &mut errors);
    let flow = section::<FlowConfig>(&table, "flow", false, &mut errors);
    let hessian = section::<HessianGrid>(&table, "hessian", false, &mut errors);
    let floer = section::<FloerStage>(&table, "floer", false, &mut errors);
    let sobolev = section::<SobolevStage>(&table, "sobolev", false, &mut errors);
    let mixing = section::<MixingSection>(&table, "mixing", false, &mut errors);
    let output = section::<OutputSection>(&table, "output", false, &mut errors);
    if !errors.is_empty() {
        return Err(ConfigError::Schema(errors));
    }
    let cfg = ExperimentConfig {
        seed: seed.expect("checked"),
        alpha: alpha.expect("checked"),
        family: family.expect("checked"),
        rigidity: rigidity.expect("checked"),
        probe: probe.expect("checked"),
        flow: flow.expect("checked"),
        hessian: hessian.expect("checked"),
        floer: floer.expect("checked"),
        sobolev: sobolev.expect("checked"),
        mixing: mixing.expect("checked"),
        output: output.expect("checked"),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Missing {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

impl ExperimentConfig {
    /// Canonical TOML; re-parsing it yields an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    fn range_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        check(
            self.probe.h > 0.0 && self.probe.h <= 1.0,
            format!("probe.h = {} must lie in (0, 1]", self.probe.h),
        );
        check(
            self.flow.step > 0.0 && self.flow.step.is_finite(),
            format!("flow.step = {} must be positive", self.flow.step),
        );
        check(
            self.hessian.nt > 0 && self.hessian.nr > 0 && self.hessian.ntheta > 0,
            "hessian grid counts must be positive".into(),
        );
        let f = &self.floer;
        check(
            f.ns >= 4 && f.nt >= 5,
            format!("floer grid {}x{} too small", f.ns, f.nt),
        );
        check(
            f.tail_tol > 0.0 && f.tail_tol < 1.0,
            format!("floer.tail_tol = {} must lie in (0, 1)", f.tail_tol),
        );
        check(
            f.s_cap > 0.0,
            format!("floer.s_cap = {} must be positive", f.s_cap),
        );
        check(
            f.max_hs > 0.0,
            format!("floer.max_hs = {} must be positive", f.max_hs),
        );
        check(
            f.solver.tolerance > 0.0,
            format!(
                "floer.solver.tolerance = {} must be positive",
                f.solver.tolerance
            ),
        );
        check(
            self.sobolev.trials >= 1,
            "sobolev.trials must be at least 1".into(),
        );
        check(
            !self.sobolev.n_list.is_empty() && self.sobolev.n_list.iter().all(|n| *n > 0),
            "sobolev.n_list must be non-empty with positive periods".into(),
        );
        if self.mixing.enabled {
            check(
                self.mixing.samples > 0,
                "mixing.samples must be positive".into(),
            );
            check(!self.mixing.a.is_empty(), "mixing.a has no sectors".into());
            check(!self.mixing.b.is_empty(), "mixing.b has no sectors".into());
            for (name, list) in [("a", &self.mixing.a), ("b", &self.mixing.b)] {
                for (i, s) in list.iter().enumerate() {
                    if Sector::new(s.r0, s.r1, s.theta0, s.theta1).is_err() {
                        v.push(format!("mixing.{name}[{i}]: invalid sector {s:?}"));
                    }
                }
            }
        }
        if let crate::rigidity_lab::FamilySpec::Perturbed { epsilon, .. } = &self.family {
            if !epsilon.is_finite() {
                v.push("family.epsilon must be finite".into());
            }
        }
        v
    }

    fn reference_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let cf = match self.alpha.build() {
            Ok(cf) => cf,
            Err(e) => return vec![format!("alpha: {e}")],
        };
        if !self.floer.n_values.is_empty() {
            let seq = match rigidity_sequence(&cf, self.rigidity.count) {
                Ok(s) => s,
                Err(e) => return vec![format!("alpha: {e}")],
            };
            let ns: Vec<BigInt> = seq.entries.iter().map(|e| e.n.clone()).collect();
            for n in &self.floer.n_values {
                if !ns.contains(&BigInt::from(*n)) {
                    v.push(format!(
                        "floer.n_values contains {n}, which is not in the rigidity sequence \
                         (rigidity.count = {}, alpha gives {:?})",
                        self.rigidity.count,
                        ns.iter().map(|n| n.to_string()).collect::<Vec<_>>()
                    ));
                }
                if *n > self.floer.max_n {
                    v.push(format!(
                        "floer.n_values contains {n} above floer.max_n = {}",
                        self.floer.max_n
                    ));
                }
            }
        }
        v
    }

    /// All range violations, then (if none) all cross-reference violations.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = self.range_violations();
        if !r.is_empty() {
            return Err(ConfigError::Schema(r));
        }
        let x = self.reference_violations();
        if !x.is_empty() {
            return Err(ConfigError::Inconsistent(x));
        }
        Ok(())
    }

    pub fn rigidity_config(&self) -> RigidityConfig {
        RigidityConfig {
            alpha: self.alpha.clone(),
            family: self.family.clone(),
            count: self.rigidity.count,
            probe: self.probe,
            flow: self.flow,
            max_flow_n: self.rigidity.max_flow_n,
            hessian: self.hessian,
            floer: self.floer.clone(),
            sobolev: SobolevStage {
                seed: self.seed,
                ..self.sobolev.clone()
            },
        }
    }
}
