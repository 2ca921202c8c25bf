use std::path::PathBuf;

use super::{HarnessError, RunConfig, RunOutputs};
use crate::pipeline::{PipelineConfig, SegmenterKind};
use crate::ppo::PpoHyper;
use crate::proto::{SegClientConfig, ENDPOINT_ENV};
use crate::segment::{RenderMode, SegmenterConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SegModeArg {
    Replace,
    Overlay,
}

/// Training flags shared by the command-line tool and the examples.
#[derive(Clone, Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long, default_value = "MiniCatch-v0")]
    pub env_id: String,
    #[arg(long, default_value_t = 47)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.25)]
    pub clip_coef: f64,
    #[arg(long, default_value_t = 2.5e-3)]
    pub learning_rate: f64,
    /// Must be 1.
    #[arg(long, default_value_t = 1)]
    pub num_envs: usize,
    #[arg(long, default_value_t = 8)]
    pub num_minibatches: usize,
    #[arg(long, default_value_t = 128)]
    pub num_steps: usize,
    #[arg(long, default_value_t = 2)]
    pub update_epochs: usize,
    #[arg(long, default_value_t = 20_000)]
    pub total_timesteps: u64,
    #[arg(long, default_value_t = 4)]
    pub frameskip: u32,
    #[arg(long, value_enum, default_value = "none")]
    pub segmenter: SegmenterKind,
    #[arg(long, value_enum, default_value = "replace")]
    pub seg_mode: SegModeArg,
    /// Blend weight of the palette color in overlay mode.
    #[arg(long, default_value_t = 0.5)]
    pub seg_alpha: f64,
    #[arg(long, default_value_t = 3)]
    pub seg_bits: u32,
    #[arg(long, default_value_t = 4)]
    pub seg_min_area: u32,
    /// `host:port` of the segmentation service; SEG_ENDPOINT takes precedence.
    #[arg(long)]
    pub seg_endpoint: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub seg_timeout_ms: u64,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Directory receiving PPM dumps of aggregated frames.
    #[arg(long)]
    pub frames_out: Option<PathBuf>,
    /// Dump every N-th aggregated frame.
    #[arg(long, default_value_t = 1000)]
    pub frame_every: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl RunArgs {
    /// Builds the run configuration, reading `SEG_ENDPOINT` from the process environment.
    pub fn into_config(self) -> Result<(RunConfig, RunOutputs), HarnessError> {
        let env_endpoint = std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty());
        self.resolve(env_endpoint)
    }

    /// Like [`Self::into_config`] with an explicit environment override.
    pub fn resolve(self, env_endpoint: Option<String>) -> Result<(RunConfig, RunOutputs), HarnessError> {
        let mode = match self.seg_mode {
            SegModeArg::Replace => RenderMode::Replace,
            SegModeArg::Overlay => RenderMode::Overlay(self.seg_alpha),
        };
        let endpoint = env_endpoint.or(self.seg_endpoint);
        let remote = match (self.segmenter, endpoint) {
            (SegmenterKind::Remote, Some(e)) => Some(SegClientConfig { endpoint: e, timeout_ms: self.seg_timeout_ms }),
            (SegmenterKind::Remote, None) => {
                return Err(HarnessError::Config(format!(
                    "--segmenter remote needs --seg-endpoint or {ENDPOINT_ENV}"
                )))
            }
            _ => None,
        };
        let config = RunConfig {
            env_id: self.env_id,
            seed: self.seed,
            num_envs: self.num_envs,
            ppo: PpoHyper {
                clip_coef: self.clip_coef,
                learning_rate: self.learning_rate,
                num_minibatches: self.num_minibatches,
                num_steps: self.num_steps,
                update_epochs: self.update_epochs,
                total_timesteps: self.total_timesteps,
                ..PpoHyper::default()
            },
            pipeline: PipelineConfig {
                frameskip: self.frameskip,
                segmenter: self.segmenter,
                seg: SegmenterConfig { bits: self.seg_bits, min_area: self.seg_min_area, mode },
                remote,
                ..PipelineConfig::default()
            },
        };
        config.validate()?;
        let outputs = RunOutputs {
            out_dir: self.out_dir,
            metrics_out: self.metrics_out,
            frames_out: self.frames_out,
            frame_every: self.frame_every,
        };
        Ok((config, outputs))
    }
}
