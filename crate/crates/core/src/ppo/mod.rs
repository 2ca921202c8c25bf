//! Proximal policy optimization: rollout collection, generalized advantage
//! estimation and the clipped-surrogate update.

mod buffer;
mod gae;
mod update;

pub use buffer::{EpisodeRecord, RolloutBuffer, RolloutCollector};
pub use gae::compute_gae;
pub use update::{
    gather_obs, minibatch_gradients, minibatch_loss, normalize_advantages, ppo_update, MinibatchInputs,
    MinibatchStats, PpoHyper, UpdateStats,
};

use thiserror::Error;

use crate::nn::NnError;
use crate::pipeline::PipelineError;

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid hyperparameters: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("non-finite loss (policy {policy_loss}, value {value_loss}, entropy {entropy})")]
    NonFiniteLoss { policy_loss: f64, value_loss: f64, entropy: f64 },
}
