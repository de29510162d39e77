//! Run configuration (JSON) and the serialized model file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ilid_core::attack::AttackConfig;
use ilid_core::calibration::{Estimator, ThresholdModel};
use ilid_core::forecaster::ForecasterSpec;
use ilid_core::series::NormStats;
use ilid_core::similarity::Metric;
use ilid_core::subsample::{PlanDescriptor, SubsamplePlan};

use crate::CliError;

/// Environment variable that overrides the remote forecaster endpoint.
pub const ENDPOINT_ENV: &str = "ILID_FORECAST_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub csv: PathBuf,
    pub column: String,
    /// Context length T.
    pub context_len: usize,
    /// Forecast horizon tau.
    pub horizon: usize,
    /// Window start stride; defaults to T + tau (non-overlapping windows).
    #[serde(default)]
    pub step: Option<usize>,
    /// Z-score the series with statistics from the calibration split.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_true() -> bool {
    true
}

impl DatasetConfig {
    pub fn resolved_step(&self) -> usize {
        self.step.unwrap_or(self.context_len + self.horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub metric: Metric,
    /// Indices into the lexicographic pair order; omitted means all pairs.
    #[serde(default)]
    pub subset: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub estimator: Estimator,
    pub preset_frr: f64,
    #[serde(default)]
    pub dynamic: bool,
    /// Dynamic buffer capacity B; defaults to the offline sample count.
    #[serde(default)]
    pub buffer_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub calibration_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        // First half calibrates, second half runs online.
        Self {
            calibration_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub forecaster: ForecasterSpec,
    pub subsample: PlanDescriptor,
    pub similarity: SimilarityConfig,
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub attack: Option<AttackConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub split: SplitConfig,
    /// Horizon used for the subsample forecasts; defaults to the task
    /// horizon tau.
    #[serde(default)]
    pub sub_horizon: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&raw)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
        config.apply_endpoint_override();
        config.validate()?;
        Ok(config)
    }

    fn apply_endpoint_override(&mut self) {
        if let ForecasterSpec::Remote { endpoint, .. } = &mut self.forecaster {
            if let Ok(value) = std::env::var(ENDPOINT_ENV) {
                if !value.is_empty() {
                    *endpoint = value;
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.dataset;
        if d.context_len == 0 || d.horizon == 0 || d.horizon > d.context_len {
            return Err(CliError::usage(format!(
                "dataset requires context_len >= horizon >= 1, got T={} tau={}",
                d.context_len, d.horizon
            )));
        }
        let fraction = self.split.calibration_fraction;
        if !(0.0 < fraction && fraction < 1.0) {
            return Err(CliError::usage(format!(
                "calibration_fraction must be in (0, 1), got {fraction}"
            )));
        }
        if !(0.0..1.0).contains(&self.threshold.preset_frr) {
            return Err(CliError::usage(format!(
                "preset_frr must be in [0, 1), got {}",
                self.threshold.preset_frr
            )));
        }
        if let Some(attack) = &self.attack {
            attack.validate().map_err(|e| CliError::usage(e.to_string()))?;
        }
        Ok(())
    }

    pub fn resolved_sub_horizon(&self) -> usize {
        self.sub_horizon.unwrap_or(self.dataset.horizon)
    }

    pub fn build_plan(&self) -> Result<SubsamplePlan, CliError> {
        SubsamplePlan::from_descriptor(self.dataset.context_len, &self.subsample)
            .map_err(|e| CliError::usage(format!("invalid subsample plan: {e}")))
    }
}

/// The calibrated model plus everything detection must agree on: metric,
/// plan, subset, sub-horizon, forecaster and normalization statistics, with
/// the resolved config echoed for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub model: ThresholdModel,
    pub metric: Metric,
    pub plan: SubsamplePlan,
    pub subset: Option<Vec<usize>>,
    pub sub_horizon: usize,
    pub forecaster: ForecasterSpec,
    pub norm_stats: Option<NormStats>,
    pub calibration_n: usize,
    pub config: RunConfig,
    pub seed: u64,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read model {}: {e}", path.display())))?;
        serde_json::from_str(&raw)
            .map_err(|e| CliError::usage(format!("invalid model {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::runtime(format!("cannot serialize model: {e}")))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
    }

    /// Detection must run with the exact pipeline the model was calibrated
    /// for; any mismatch is refused.
    pub fn check_compatible(&self, config: &RunConfig) -> Result<(), CliError> {
        let plan = config.build_plan()?;
        if plan.descriptor != self.plan.descriptor || plan.t != self.plan.t {
            return Err(CliError::usage(
                "config subsample plan differs from the model's calibration plan".into(),
            ));
        }
        if config.similarity.metric != self.metric {
            return Err(CliError::usage(format!(
                "config metric {} differs from the model's metric {}",
                config.similarity.metric.name(),
                self.metric.name()
            )));
        }
        if config.similarity.subset != self.subset {
            return Err(CliError::usage(
                "config pair subset differs from the model's calibration subset".into(),
            ));
        }
        if config.resolved_sub_horizon() != self.sub_horizon {
            return Err(CliError::usage(format!(
                "config sub_horizon {} differs from the model's {}",
                config.resolved_sub_horizon(),
                self.sub_horizon
            )));
        }
        if config.forecaster != self.forecaster {
            return Err(CliError::usage(
                "config forecaster differs from the model's forecaster".into(),
            ));
        }
        Ok(())
    }
}
