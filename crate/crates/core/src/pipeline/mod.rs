//! Observation wrapper stack: frame skip with max-pooling, optional
//! segmentation on the raw RGB frame, grayscale, 84x84 area downscale,
//! frame stacking and reward clipping.

mod ops;

pub use ops::{clip_reward, downscale, frame_skip_step, grayscale, FrameStack, GrayImage, ObsTensor, OBS_SIZE};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Env, EnvError};
use crate::frame::Frame;
use crate::proto::{RemoteError, SegClient, SegClientConfig};
use crate::segment::{render, segment_labels, RenderMode, SegmentError, SegmenterConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error("expected a {expected_w}x{expected_h} image, got {width}x{height}")]
    ImageShape { width: usize, height: usize, expected_w: usize, expected_h: usize },
    #[error("pipeline used before reset")]
    NotReset,
}

/// Which segmentation stage runs on each aggregated frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SegmenterKind {
    None,
    Builtin,
    Remote,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub frameskip: u32,
    pub segmenter: SegmenterKind,
    /// Quantization, suppression and rendering settings. Rendering applies to
    /// remote label maps too.
    pub seg: SegmenterConfig,
    /// Used when `segmenter` is `Remote`.
    pub remote: Option<SegClientConfig>,
    pub stack_depth: usize,
    pub clip_rewards: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            frameskip: 4,
            segmenter: SegmenterKind::None,
            seg: SegmenterConfig::default(),
            remote: None,
            stack_depth: 4,
            clip_rewards: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.frameskip < 1 {
            return Err(PipelineError::Config("frameskip must be >= 1".into()));
        }
        if self.stack_depth < 1 {
            return Err(PipelineError::Config("stack depth must be >= 1".into()));
        }
        if self.segmenter != SegmenterKind::None {
            self.seg.validate()?;
        }
        if self.segmenter == SegmenterKind::Remote && self.remote.is_none() {
            return Err(PipelineError::Config("remote segmenter needs an endpoint".into()));
        }
        Ok(())
    }
}

enum Stage {
    Raw,
    Builtin(SegmenterConfig),
    Remote(Box<SegClient>, RenderMode),
}

/// One wrapped-environment transition.
#[derive(Clone, Debug)]
pub struct PipelineStep {
    pub obs: ObsTensor,
    /// Reward after optional clipping.
    pub reward: f64,
    /// Sum of native rewards before clipping.
    pub raw_reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl PipelineStep {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// An environment wrapped in the preprocessing stack.
pub struct Pipeline {
    env: Box<dyn Env>,
    config: PipelineConfig,
    stage: Stage,
    stack: FrameStack,
    last_frame: Option<Frame>,
}

impl Pipeline {
    /// Validates `config` and, for a remote segmenter, connects right away.
    pub fn build(env: Box<dyn Env>, config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let stage = match config.segmenter {
            SegmenterKind::None => Stage::Raw,
            SegmenterKind::Builtin => Stage::Builtin(config.seg),
            SegmenterKind::Remote => {
                let remote = config.remote.clone().expect("validated");
                Stage::Remote(Box::new(SegClient::connect(remote)?), config.seg.mode)
            }
        };
        Ok(Pipeline {
            env,
            stack: FrameStack::new(config.stack_depth),
            config,
            stage,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn action_count(&self) -> usize {
        self.env.action_count()
    }

    pub fn env_id(&self) -> &str {
        self.env.id()
    }

    /// The most recent frame handed to grayscale, i.e. after segmentation.
    pub fn last_frame(&self) -> Option<&Frame> {
        self.last_frame.as_ref()
    }

    fn preprocess(&mut self, frame: Frame) -> Result<GrayImage, PipelineError> {
        let frame = match &mut self.stage {
            Stage::Raw => frame,
            Stage::Builtin(cfg) => {
                let map = segment_labels(&frame, cfg)?;
                render(&map, &frame, cfg.mode)?
            }
            Stage::Remote(client, mode) => {
                let map = client.segment(&frame)?;
                render(&map, &frame, *mode)?
            }
        };
        let small = downscale(&grayscale(&frame))?;
        self.last_frame = Some(frame);
        Ok(small)
    }

    pub fn reset(&mut self, seed: u64) -> Result<ObsTensor, PipelineError> {
        let frame = self.env.reset(seed);
        let small = self.preprocess(frame)?;
        Ok(self.stack.reset(small))
    }

    pub fn step(&mut self, action: usize) -> Result<PipelineStep, PipelineError> {
        if self.last_frame.is_none() {
            return Err(PipelineError::NotReset);
        }
        let result = frame_skip_step(self.env.as_mut(), action, self.config.frameskip)?;
        let small = self.preprocess(result.frame)?;
        let reward = if self.config.clip_rewards { clip_reward(result.reward) } else { result.reward };
        Ok(PipelineStep {
            obs: self.stack.push(small),
            reward,
            raw_reward: result.reward,
            terminated: result.terminated,
            truncated: result.truncated,
        })
    }
}
