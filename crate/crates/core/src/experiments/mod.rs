//! Configuration, the four experiments, formula calculators and report output.
//!
//! Every default below reproduces the published experimental setting where one is given;
//! the remaining knobs (stream length, warm-up, grid spacing) are exposed in the config.

pub mod calc;
pub mod exp1;
pub mod exp2;
pub mod exp3;
pub mod exp4;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::KbGenParams;
use crate::metrics::InfoModel;
use crate::num::splitmix64;
use crate::policies::{FrequencySource, PolicyKind};
use crate::thermo::ThermoParams;

pub use calc::{calc, CalcOutput, CalcRequest};
pub use exp1::exp1_duality;
pub use exp2::exp2_phase;
pub use exp3::exp3_baselines;
pub use exp4::exp4_sensitivity;
pub use report::{emit_report, Cell, ExperimentReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [ExperimentId::Exp1, ExperimentId::Exp2, ExperimentId::Exp3, ExperimentId::Exp4];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Shape of a synthetic knowledge base; the seed comes from the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KbSpec {
    pub atom_count: usize,
    pub rules_per_atom: f64,
    pub target_mean_depth: f64,
    pub max_arity: usize,
}

impl KbSpec {
    pub fn params(&self, seed: u64) -> KbGenParams {
        KbGenParams::new(
            self.atom_count,
            (self.atom_count as f64 * self.rules_per_atom).round() as usize,
            self.target_mean_depth,
            self.max_arity,
            seed,
        )
    }
}

impl Default for KbSpec {
    fn default() -> Self {
        KbSpec {
            atom_count: 2000,
            rules_per_atom: 3.0,
            target_mean_depth: 5.0,
            max_arity: 2,
        }
    }
}

/// Settings of the information model; `bits_per_atom` defaults to `⌈log₂ atoms⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfoSettings {
    pub c: f64,
    pub bits_per_atom: Option<f64>,
}

impl Default for InfoSettings {
    fn default() -> Self {
        InfoSettings {
            c: 1.0,
            bits_per_atom: None,
        }
    }
}

impl InfoSettings {
    pub fn model(&self, atom_count: usize) -> InfoModel {
        let mut m = InfoModel::for_atom_count(atom_count);
        m.c = self.c;
        if let Some(b) = self.bits_per_atom {
            m.bits_per_atom = b;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp1Config {
    pub atom_counts: Vec<usize>,
    pub rules_per_atom: f64,
    pub target_mean_depth: f64,
    pub max_arity: usize,
    pub queries_per_kb: usize,
    /// Zipf exponent of the access distribution over all answerable queries.
    pub alpha: f64,
}

impl Default for Exp1Config {
    fn default() -> Self {
        Exp1Config {
            atom_counts: vec![1_000, 10_000, 100_000],
            rules_per_atom: 3.0,
            target_mean_depth: 4.0,
            max_arity: 2,
            queries_per_kb: 50,
            alpha: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp2Config {
    pub kb: KbSpec,
    pub query_count: usize,
    pub alphas: Vec<f64>,
    /// Number of storage fractions, evenly spaced over `[0, 1]`.
    pub grid_points: usize,
    pub stream_length: usize,
    pub warmup_fraction: f64,
    pub noise_floor: f64,
    pub policy: PolicyKind,
}

impl Default for Exp2Config {
    fn default() -> Self {
        Exp2Config {
            kb: KbSpec::default(),
            query_count: 1000,
            alphas: vec![1.0, 1.2, 1.5],
            grid_points: 21,
            stream_length: 100_000,
            warmup_fraction: crate::simulator::DEFAULT_WARMUP,
            noise_floor: 1e-3,
            policy: PolicyKind::FreqDepth {
                frequency: FrequencySource::Oracle,
            },
        }
    }
}

impl Exp2Config {
    pub fn betas(&self) -> Vec<f64> {
        let n = self.grid_points.max(2);
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp3Config {
    pub kb: KbSpec,
    pub query_count: usize,
    pub alpha: f64,
    pub stream_length: usize,
    pub warmup_fraction: f64,
    pub cache_sizes: Vec<usize>,
    pub policies: Vec<PolicyKind>,
    /// Number of independent seeds (knowledge base and stream).
    pub seeds: usize,
    /// Cache size of the highlighted comparison.
    pub highlight_size: usize,
}

impl Default for Exp3Config {
    fn default() -> Self {
        Exp3Config {
            kb: KbSpec::default(),
            query_count: 1000,
            alpha: 1.2,
            stream_length: 100_000,
            warmup_fraction: crate::simulator::DEFAULT_WARMUP,
            cache_sizes: vec![10, 25, 50, 100, 200, 300, 400, 500],
            policies: vec![
                PolicyKind::Lru,
                PolicyKind::Lfu,
                PolicyKind::TrueMi,
                PolicyKind::FreqDepth {
                    frequency: FrequencySource::Decayed { decay: 0.9999 },
                },
            ],
            seeds: 10,
            highlight_size: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp4Config {
    pub alphas: Vec<f64>,
    pub depths: Vec<f64>,
    pub entities: Vec<usize>,
    /// Values held fixed while another factor is swept.
    pub base_alpha: f64,
    pub base_depth: f64,
    pub base_entities: usize,
    pub rules_per_atom: f64,
    pub max_arity: usize,
    /// Number of accesses over which stored bits are amortised.
    pub amortization_window: f64,
}

impl Default for Exp4Config {
    fn default() -> Self {
        Exp4Config {
            alphas: vec![1.0, 1.2, 1.5, 1.8, 2.0],
            depths: vec![2.0, 3.0, 5.0, 7.0, 10.0],
            entities: vec![100, 500, 1000, 5000],
            base_alpha: 1.2,
            base_depth: 5.0,
            base_entities: 1000,
            rules_per_atom: 3.0,
            max_arity: 2,
            amortization_window: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub thermo: ThermoParams<f64>,
    pub info: InfoSettings,
    pub exp1: Exp1Config,
    pub exp2: Exp2Config,
    pub exp3: Exp3Config,
    pub exp4: Exp4Config,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: 42,
            output_dir: None,
            thermo: ThermoParams::default(),
            info: InfoSettings::default(),
            exp1: Exp1Config::default(),
            exp2: Exp2Config::default(),
            exp3: Exp3Config::default(),
            exp4: Exp4Config::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&src).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.thermo.validate()?;
        self.info.model(2).validate()?;
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.exp1.atom_counts.is_empty() || self.exp1.queries_per_kb == 0 {
            return bad("exp1 needs at least one KB size and one query");
        }
        if self.exp2.alphas.is_empty() || self.exp2.grid_points < 2 {
            return bad("exp2 needs alphas and at least two grid points");
        }
        if self.exp3.policies.is_empty() || self.exp3.cache_sizes.is_empty() || self.exp3.seeds == 0 {
            return bad("exp3 needs policies, cache sizes and seeds");
        }
        for p in self.exp3.policies.iter().chain([&self.exp2.policy]) {
            p.validate()?;
        }
        if !(self.exp4.amortization_window > 0.0) {
            return bad("exp4 amortization_window must be positive");
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

/// Independent seed for stream `index` of purpose `tag`.
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ tag.rotate_left(48)) ^ index)
}

pub fn run_experiment(id: ExperimentId, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match id {
        ExperimentId::Exp1 => exp1_duality(cfg),
        ExperimentId::Exp2 => exp2_phase(cfg),
        ExperimentId::Exp3 => exp3_baselines(cfg),
        ExperimentId::Exp4 => exp4_sensitivity(cfg),
    }
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn r_squared(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy * sxy / (sxx * syy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_toml_overrides() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 7\n[exp3]\nseeds = 2\ncache_sizes = [5]\npolicies = [{ policy = \"lru\" }, { policy = \"threshold\", tau_scale = 0.5 }]\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.exp3.seeds, 2);
        assert_eq!(cfg.exp3.policies[1], PolicyKind::Threshold { tau_scale: 0.5 });
        assert_eq!(cfg.exp1, Exp1Config::default());
    }

    #[test]
    fn bad_configs() {
        let partial = ExperimentConfig::from_toml("[thermo]\nomega = 2.0\n[exp2.kb]\natom_count = 500").unwrap();
        assert_eq!(partial.thermo.omega, 2.0);
        assert_eq!(partial.thermo.temperature, 300.0);
        assert_eq!(partial.exp2.kb.atom_count, 500);
        assert_eq!(partial.exp2.kb.max_arity, KbSpec::default().max_arity);
        assert!(ExperimentConfig::from_toml("[thermo]\nomgea = 2.0").is_err());
        assert!(matches!(ExperimentConfig::from_toml("sed = 1"), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_toml("[exp3]\nseeds = 0").is_err());
        assert!(ExperimentConfig::from_toml("[exp2]\npolicy = { policy = \"threshold\", tau_scale = -1.0 }").is_err());
        assert!("exp9".parse::<ExperimentId>().is_err());
        assert_eq!("exp2".parse::<ExperimentId>().unwrap(), ExperimentId::Exp2);
    }

    #[test]
    fn grid_and_fit_helpers() {
        let b = Exp2Config::default().betas();
        assert_eq!(b.len(), 21);
        assert_eq!(b[0], 0.0);
        assert_eq!(b[20], 1.0);
        assert!((b[2] - 0.1).abs() < 1e-15);
        let x = [1.0, 2.0, 3.0];
        assert!((r_squared(&x, &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(r_squared(&x, &[1.0, 1.0, 1.0]).is_none());
        assert_ne!(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
    }
}
