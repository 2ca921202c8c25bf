//! Environment contract, the native pixel games, and the game taxonomy.

mod minibricks;
mod minicatch;
mod rng;
mod taxonomy;

pub use minibricks::MiniBricks;
pub use minicatch::{MiniCatch, MAX_BALLS, PADDLE_START_X, PADDLE_WIDTH, BALL_SIZE, BALLS_PER_EPISODE};
pub use rng::SplitMix64;
pub use taxonomy::{taxonomy_entries, taxonomy_lookup, Exploration, ObjectCount, RewardClass, TaxonomyEntry};

use thiserror::Error;

use crate::frame::Frame;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("step called after the episode ended; reset first")]
    EpisodeOver,
    #[error("step called before reset")]
    NotReset,
    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },
    #[error("unknown environment id {0:?}")]
    UnknownEnv(String),
    #[error("unknown game {0:?}")]
    UnknownGame(String),
    #[error("invalid environment parameter: {0}")]
    InvalidParameter(String),
}

/// Outcome of one native frame.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub frame: Frame,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// A deterministic, seeded environment producing RGB frames.
pub trait Env: Send {
    fn id(&self) -> &str;

    fn action_count(&self) -> usize;

    /// Restarts the episode. The resulting state depends only on `seed`.
    fn reset(&mut self, seed: u64) -> Frame;

    /// Advances exactly one native frame.
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
}

pub const MINICATCH: &str = "MiniCatch-v0";
pub const MINICATCH8: &str = "MiniCatch8-v0";
pub const MINIBRICKS: &str = "MiniBricks-v0";

/// Registered native environment ids.
pub const ENV_IDS: [&str; 3] = [MINICATCH, MINICATCH8, MINIBRICKS];

pub fn make_env(id: &str) -> Result<Box<dyn Env>, EnvError> {
    match id {
        MINICATCH => Ok(Box::new(MiniCatch::new(1)?)),
        MINICATCH8 => Ok(Box::new(MiniCatch::new(8)?.with_id(MINICATCH8))),
        MINIBRICKS => Ok(Box::new(MiniBricks::new())),
        other => Err(EnvError::UnknownEnv(other.to_string())),
    }
}

pub fn action_count(id: &str) -> Result<usize, EnvError> {
    match id {
        MINICATCH | MINICATCH8 => Ok(3),
        MINIBRICKS => Ok(4),
        other => Err(EnvError::UnknownEnv(other.to_string())),
    }
}

/// On-screen object count class of a native environment.
pub fn native_object_count(id: &str) -> Result<ObjectCount, EnvError> {
    match id {
        MINICATCH | MINIBRICKS => Ok(ObjectCount::Low),
        MINICATCH8 => Ok(ObjectCount::High),
        other => Err(EnvError::UnknownEnv(other.to_string())),
    }
}
