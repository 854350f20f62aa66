//! Campaign configuration.

use anyhow::{Context, Result};
use ergomax_core::CheckId;
use serde::{Deserialize, Serialize};

use crate::generate::{SequenceFamily, WeightFamily};

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "ERGOMAX_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub mode: Mode,
    pub checks: Vec<CheckId>,
    pub corpus: CorpusSpec,
    pub constants: ConstantOverrides,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mode: Mode::Float,
            checks: CheckId::ALL.to_vec(),
            corpus: CorpusSpec::default(),
            constants: ConstantOverrides::default(),
        }
    }
}

/// Sizes and families of the generated corpus. Per-instance checks draw
/// `instances` inputs each; the trend checks run once over their grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub instances: usize,
    /// Longest sequence window.
    pub max_len: u64,
    /// Longest window for the sharp-maximal checks, whose cost is cubic.
    pub sharp_max_len: u64,
    /// Longest weight window for the interval inequalities.
    pub interval_max_len: u64,
    /// Largest weight window built for the weak-type checks; heights needing
    /// more are skipped.
    pub max_weight_window: u64,
    pub sequence_kinds: Vec<SequenceFamily>,
    pub weight_kinds: Vec<WeightFamily>,
    pub p_grid: Vec<f64>,
    pub lambda_grid: String,
    /// Cycle lengths for the ergodic weak-type check.
    pub system_sizes: Vec<usize>,
    /// Cycle lengths for the transference identity, inclusive.
    pub transfer_cycle_range: (usize, usize),
    pub trend_windows: Vec<u64>,
    pub trend_cycles: Vec<usize>,
    /// Weights per size in the strong-type trends.
    pub trend_weights: usize,
    pub converse_trials: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            instances: 12,
            max_len: 32,
            sharp_max_len: 16,
            interval_max_len: 32,
            max_weight_window: 256,
            sequence_kinds: SequenceFamily::ALL.to_vec(),
            weight_kinds: WeightFamily::ALL.to_vec(),
            p_grid: vec![1.5, 2.0, 3.0],
            lambda_grid: "auto:8".into(),
            system_sizes: vec![5, 8, 13, 21, 34, 64],
            transfer_cycle_range: (5, 64),
            trend_windows: vec![64, 256, 1024],
            trend_cycles: vec![32, 128, 512],
            trend_weights: 3,
            converse_trials: 6,
        }
    }
}

impl CorpusSpec {
    /// No generated instances at all.
    pub fn is_empty(&self) -> bool {
        self.instances == 0 && self.trend_windows.is_empty() && self.trend_cycles.is_empty()
    }
}

/// Replacement constants, used to confirm that a checker can fail.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantOverrides {
    /// Replaces 36 in the weak (1,1) inequality; a decimal or fraction.
    pub weak11: Option<String>,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).context("invalid campaign config")?;
        config.validate()?;
        Ok(config)
    }

    /// Applies `ERGOMAX_SEED` when set.
    pub fn with_env_seed(mut self, value: Option<&str>) -> Result<Self> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer"))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.corpus;
        anyhow::ensure!(
            c.p_grid.iter().all(|p| p.is_finite() && *p >= 1.0),
            "p-grid entries must be finite and at least 1"
        );
        anyhow::ensure!(
            c.max_len >= 1 && c.sharp_max_len >= 1,
            "window lengths must be positive"
        );
        anyhow::ensure!(c.interval_max_len >= 1, "window lengths must be positive");
        anyhow::ensure!(
            c.transfer_cycle_range.0 >= 1 && c.transfer_cycle_range.0 <= c.transfer_cycle_range.1,
            "transfer cycle range must be a non-empty range of positive lengths"
        );
        anyhow::ensure!(
            c.system_sizes.iter().all(|n| *n >= 1),
            "system sizes must be positive"
        );
        anyhow::ensure!(
            c.trend_cycles.iter().all(|n| *n >= 8),
            "trend cycles need at least 8 atoms"
        );
        anyhow::ensure!(
            c.trend_windows.iter().all(|n| *n >= 2),
            "trend windows need at least 2 points"
        );
        ergomax_core::io::LambdaGrid::parse(&c.lambda_grid)?;
        if let Some(w) = &self.constants.weak11 {
            ergomax_core::scalar::parse_exact(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let config = CampaignConfig::default();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(CampaignConfig::from_json(&text).unwrap(), config);
        assert_eq!(CampaignConfig::from_json("{}").unwrap(), config);
    }

    #[test]
    fn partial_and_invalid_configs() {
        let c = CampaignConfig::from_json(r#"{"seed": 9, "checks": ["weak11"], "mode": "exact"}"#)
            .unwrap();
        assert_eq!(
            (c.seed, c.mode, c.checks.clone()),
            (9, Mode::Exact, vec![CheckId::Weak11])
        );
        assert_eq!(c.with_env_seed(Some("42")).unwrap().seed, 42);
        for bad in [
            r#"{"seed": -1}"#,
            r#"{"unknown": 1}"#,
            r#"{"checks": ["nope"]}"#,
            r#"{"corpus": {"p_grid": [0.5]}}"#,
            r#"{"corpus": {"lambda_grid": "geom:1"}}"#,
            r#"{"constants": {"weak11": "x"}}"#,
        ] {
            assert!(CampaignConfig::from_json(bad).is_err(), "{bad}");
        }
        assert!(CampaignConfig::default().with_env_seed(Some("x")).is_err());
    }
}
