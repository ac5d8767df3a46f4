use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ghzsim_core::catalog::{ErrorModel, RateSet, Scheme};
use ghzsim_core::markov::ClockVariant;
use ghzsim_core::solver::SolverConfig;
use ghzsim_core::tuner::{LogAxis, Objective, MAX_GRID_POINTS};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Many(Vec<usize>),
}

impl Sizes {
    pub fn list(&self) -> Vec<usize> {
        match self {
            Sizes::One(n) => vec![*n],
            Sizes::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chain {
    Clock,
    StateCond,
    QutritAggregate,
    QutritSequential,
    QutritWave,
    Lattice,
    Frontier,
}

impl Chain {
    pub const ALL: [Chain; 7] = [
        Chain::Clock,
        Chain::StateCond,
        Chain::QutritAggregate,
        Chain::QutritSequential,
        Chain::QutritWave,
        Chain::Lattice,
        Chain::Frontier,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarkovConfig {
    pub chains: Vec<Chain>,
    pub clock_variant: ClockVariant,
    pub frontier_trials: usize,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        MarkovConfig { chains: Chain::ALL.to_vec(), clock_variant: ClockVariant::ThreeLevel, frontier_trials: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    pub objective: Objective,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig { objective: Objective::FullSolve }
    }
}

/// One experiment file. `seed` also seeds the solver; `output` is not part
/// of the hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub analysis_companions: bool,
    pub n: Sizes,
    #[serde(default)]
    pub error_model: Option<ErrorModel>,
    #[serde(default)]
    pub rates: RateSet,
    #[serde(default)]
    pub sweep: Vec<LogAxis>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub markov: MarkovConfig,
    #[serde(default)]
    pub tune: TuneConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.n.list()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let sizes = self.sizes();
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(bad("n: need at least one size, all >= 1"));
        }
        self.rates.validate().map_err(|e| bad(format!("rates: {e}")))?;
        self.solver.validate().map_err(|e| bad(format!("solver: {e}")))?;
        let mut seen = BTreeSet::new();
        let mut total = 1usize;
        for (i, axis) in self.sweep.iter().enumerate() {
            if !seen.insert(axis.rate) {
                return Err(bad(format!("sweep[{i}].rate: {} swept twice", axis.rate)));
            }
            let len = axis.values().map_err(|e| bad(format!("sweep[{i}]: {e}")))?.len();
            total = total.saturating_mul(len);
        }
        if total > MAX_GRID_POINTS {
            return Err(bad(format!("sweep: {total} grid points exceed the cap {MAX_GRID_POINTS}")));
        }
        if self.markov.frontier_trials == 0 {
            return Err(bad("markov.frontier_trials: must be >= 1"));
        }
        Ok(())
    }

    pub fn require_scheme(&self) -> Result<Scheme, ConfigError> {
        self.scheme.ok_or_else(|| bad("scheme: required for this command"))
    }

    pub fn error_model(&self, scheme: Scheme) -> ErrorModel {
        self.error_model.unwrap_or_else(|| scheme.default_error_model())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { seed: self.seed, ..self.solver.clone() }
    }

    /// sha256 of the canonical JSON form: keys sorted, output path omitted.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical_json(&value).as_bytes()))
    }
}

fn canonical_json(v: &serde_json::Value) -> String {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let body: Vec<String> =
                keys.iter().map(|k| format!("{}:{}", Value::String((*k).clone()), canonical_json(&map[k.as_str()]))).collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(items) => format!("[{}]", items.iter().map(canonical_json).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
scheme = "qutrit_wave"
n = [2, 3]
seed = 5

[rates]
kappa_st = 1000.0
kappa_c = 1000.0
kappa_u = 1.0

[[sweep]]
rate = "kappa_p"
lo = 0.01
hi = 1.0
points = 3
"#;

    #[test]
    fn parses_and_hashes() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.sizes(), vec![2, 3]);
        assert_eq!(cfg.hash().len(), 64);
        assert_eq!(cfg.solver().seed, 5);
    }

    #[test]
    fn hash_ignores_key_order_and_output() {
        let reordered = r#"
seed = 5
n = [2, 3]
scheme = "qutrit_wave"
output = "elsewhere"

[[sweep]]
points = 3
hi = 1.0
lo = 0.01
rate = "kappa_p"

[rates]
kappa_u = 1.0
kappa_c = 1000.0
kappa_st = 1000.0
"#;
        let a = ExperimentConfig::parse(BASE).unwrap();
        let b = ExperimentConfig::parse(reordered).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), a.clone().with_seed(6).hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse(&BASE.replace("kappa_u = 1.0", "kappa_uu = 1.0")).unwrap_err();
        assert!(err.0.contains("kappa_uu"), "{err}");
        assert!(ExperimentConfig::parse(&format!("{BASE}\nbogus = 1\n")).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::parse(&BASE.replace("kappa_u = 1.0", "kappa_u = -1.0")).is_err());
        assert!(ExperimentConfig::parse(&BASE.replace("lo = 0.01", "lo = 0.0")).is_err());
        assert!(ExperimentConfig::parse(&BASE.replace("n = [2, 3]", "n = []")).is_err());
    }

    #[test]
    fn single_size() {
        let cfg = ExperimentConfig::parse(&BASE.replace("n = [2, 3]", "n = 4")).unwrap();
        assert_eq!(cfg.sizes(), vec![4]);
    }
}
