//! Run configuration, read from TOML.
//!
//! ```toml
//! method = "expert"
//! total_updates = 4000
//! seeds = [0, 1, 2]
//!
//! [sim]
//! n_ue = 3
//!
//! [hp]
//! hidden = [64, 64]
//!
//! [weights]
//! alpha = 0.9
//! beta = 1.15
//! ```
//!
//! Every field is optional; omitted fields take the defaults below.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::Hyperparams;
use crate::error::{config_err, Error, Result};
use crate::reward::{RewardWeights, DEFAULT_COMPARE_TOL};
use crate::sim::{McsTable, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    Dual,
    Expert,
    BaselineOnly,
}

impl Method {
    /// Weights used when the config has no `[weights]` table.
    pub fn default_weights(self) -> RewardWeights {
        match self {
            Method::Direct => RewardWeights { alpha: 1.0, beta: 5.0 },
            Method::Dual => RewardWeights { alpha: 0.85, beta: 1.05 },
            Method::Expert | Method::BaselineOnly => RewardWeights { alpha: 0.9, beta: 1.15 },
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Dual => "dual",
            Method::Expert => "expert",
            Method::BaselineOnly => "baseline-only",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "dual" => Ok(Method::Dual),
            "expert" => Ok(Method::Expert),
            "baseline-only" => Ok(Method::BaselineOnly),
            other => Err(config_err(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    /// Parallel training environments feeding one replay buffer.
    pub n_envs: usize,
    /// Training updates per run (per agent for dual learning).
    pub total_updates: u64,
    /// Updates between evaluations.
    pub eval_every: u64,
    /// One independent run per training seed.
    pub seeds: Vec<u64>,
    /// Held-out episode seeds used only for evaluation.
    pub eval_seeds: Vec<u64>,
    pub eval_ttis: u64,
    /// Moving window (TTIs) for the reward metrics.
    pub metrics_window: usize,
    /// Relative band for the comparative rewards.
    pub compare_tol: f64,
    /// Updates per alternation phase in dual learning.
    pub dual_phase_updates: u64,
    /// Training episode length before an environment is reset with a new
    /// seed.
    pub episode_ttis: u64,
    pub out_dir: PathBuf,
    /// Optional CSV MCS table; the built-in CQI table otherwise.
    pub mcs_table: Option<PathBuf>,
    pub sim: SimConfig,
    pub hp: Hyperparams,
    pub weights: Option<RewardWeights>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Expert,
            n_envs: 8,
            total_updates: 4000,
            eval_every: 50,
            seeds: vec![0],
            eval_seeds: (1_000_001..=1_000_005).collect(),
            eval_ttis: 2000,
            metrics_window: 200,
            compare_tol: DEFAULT_COMPARE_TOL,
            dual_phase_updates: 100,
            episode_ttis: 1000,
            out_dir: PathBuf::from("results"),
            mcs_table: None,
            sim: SimConfig::default(),
            hp: Hyperparams::default(),
            weights: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn weights(&self) -> RewardWeights {
        self.weights.unwrap_or_else(|| self.method.default_weights())
    }

    pub fn table(&self) -> Result<McsTable> {
        match &self.mcs_table {
            Some(path) => McsTable::load(path),
            None => Ok(McsTable::lte_cqi()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.hp.validate()?;
        self.weights().validate()?;
        if self.n_envs == 0 {
            return Err(config_err("n_envs must be at least 1"));
        }
        if self.eval_every == 0 {
            return Err(config_err("eval_every must be at least 1"));
        }
        if self.seeds.is_empty() || self.eval_seeds.is_empty() {
            return Err(config_err("seeds and eval_seeds must be non-empty"));
        }
        if self.eval_ttis == 0 || self.episode_ttis == 0 || self.metrics_window == 0 {
            return Err(config_err("eval_ttis, episode_ttis and metrics_window must be positive"));
        }
        if !(self.compare_tol >= 0.0 && self.compare_tol.is_finite()) {
            return Err(config_err("compare_tol must be finite and non-negative"));
        }
        if self.dual_phase_updates == 0 {
            return Err(config_err("dual_phase_updates must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.weights(), RewardWeights { alpha: 0.9, beta: 1.15 });
    }

    #[test]
    fn nested_tables_override() {
        let cfg = RunConfig::from_toml_str(
            r#"
method = "dual"
seeds = [3, 4]
[sim]
n_ue = 3
[hp]
hidden = [32, 32]
gamma = 0.9
"#,
        )
        .unwrap();
        assert_eq!(cfg.method, Method::Dual);
        assert_eq!(cfg.sim.n_ue, 3);
        assert_eq!(cfg.hp.hidden, vec![32, 32]);
        assert_eq!(cfg.weights(), RewardWeights { alpha: 0.85, beta: 1.05 });
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.weights = Some(RewardWeights { alpha: 1.0, beta: 10.0 });
        cfg.mcs_table = Some(PathBuf::from("table.csv"));
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            "n_envs = 0",
            "eval_every = 0",
            "unknown_field = 1",
            "method = \"sideways\"",
            "[weights]\nalpha = 0.0\nbeta = 0.0",
            "[hp]\ntau = 0.0",
            "[sim]\nn_ue = 1",
            "seeds = []",
        ] {
            assert!(RunConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
