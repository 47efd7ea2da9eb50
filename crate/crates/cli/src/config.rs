use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use uncloneable::attacks::AttackDescriptor;
use uncloneable::schemes::SchemeDescriptor;

/// Overrides for the default pass/fail slack of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    /// Absolute tolerance of exact comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs: Option<f64>,
    /// Multiple of the standard error allowed on Monte Carlo comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<f64>,
}

/// One experiment run, read from a JSON file and patched by command-line flags.
///
/// Every field is optional in the file; experiment-specific fields are
/// ignored by experiments that do not use them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When set, must name the subcommand being run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerance: ToleranceOverrides,

    /// Mixing weights for `lemma1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// `(M, d)` pairs for `theorem2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<(usize, usize)>>,
    /// Numbers of variables for `erlang`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Seesaw iteration cap and random restarts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Where `meg` writes the dense game and strategy dumps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<PathBuf>,
    /// Message count and dimension scanned by `conjecture-scan`.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("malformed config")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == Some(0) {
            bail!("trials must be at least 1");
        }
        if self.key_samples == Some(0) {
            bail!("key_samples must be at least 1");
        }
        for (name, v) in [
            ("abs", self.tolerance.abs),
            ("sigmas", self.tolerance.sigmas),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    bail!("tolerance.{name} must be a nonnegative number, got {v}");
                }
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> anyhow::Result<u64> {
        self.seed
            .context("this experiment is randomized: pass --seed or set \"seed\" in the config")
    }

    pub fn sigmas(&self) -> f64 {
        self.tolerance.sigmas.unwrap_or(3.0)
    }

    pub fn abs_tol(&self, default: f64) -> f64 {
        self.tolerance.abs.unwrap_or(default)
    }
}
