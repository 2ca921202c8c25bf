//! Experiment harness: training runs, metrics logging, EMA end results,
//! improvement reports, frame dumps and paired raw-vs-segmented experiments.

mod cli;
mod experiment;
mod metrics;
mod ppm;
mod report;
mod train;

pub use cli::{RunArgs, SegModeArg};
pub use experiment::{
    config_diff, is_segmentation_field, paired_configs, random_policy_baseline, random_policy_baseline_with,
    run_experiment, run_experiment_with, BaselineStats,
    ExperimentOutcome, RunSummary, EMA_FACTOR,
};
pub use metrics::{MetricsLog, MetricsRow, METRICS_HEADER};
pub use ppm::{dump_frame, read_ppm};
pub use report::{ema_smooth, improvement_percent, improvement_report, ImprovementReport, Outcome, ReportRow, ScorePair};
pub use train::{run_training, run_training_with, EnvFactory, TrainingRun};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvError, MINICATCH};
use crate::nn::NnError;
use crate::pipeline::{PipelineConfig, PipelineError};
use crate::ppo::{PpoError, PpoHyper};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot smooth an empty series")]
    EmptySeries,
    #[error("malformed PPM file: {0}")]
    Ppm(String),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

/// Everything that determines a training run's outcome. Output locations
/// live in [`RunOutputs`] so two configs can be compared directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env_id: String,
    pub seed: u64,
    /// Only a single environment copy is supported.
    pub num_envs: usize,
    pub ppo: PpoHyper,
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            env_id: MINICATCH.to_string(),
            seed: 47,
            num_envs: 1,
            ppo: PpoHyper::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.num_envs != 1 {
            return Err(HarnessError::Config(format!("num-envs must be 1, got {}", self.num_envs)));
        }
        self.ppo.validate()?;
        self.pipeline.validate()?;
        Ok(())
    }

    /// Canonical JSON form used for config diffs and run directories.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }
}

/// Where a run writes its artifacts. All optional.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutputs {
    /// Receives `config.json`, `metrics.csv` and `params.bin` unless overridden.
    pub out_dir: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub frames_out: Option<PathBuf>,
    /// Dump every `frame_every`-th aggregated frame (0 disables dumping).
    pub frame_every: u64,
}

impl RunOutputs {
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        RunOutputs { out_dir: Some(dir.into()), ..Default::default() }
    }

    fn metrics_path(&self) -> Option<PathBuf> {
        self.metrics_out.clone().or_else(|| self.out_dir.as_ref().map(|d| d.join("metrics.csv")))
    }
}
