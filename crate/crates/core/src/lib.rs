//! Reinforcement learning on segmentation-preprocessed pixel observations.
//!
//! The crate bundles deterministic Atari-like environments, an observation
//! pipeline with an optional segmentation stage (in-process or over a small
//! TCP protocol), a convolutional policy/value network with hand-written
//! gradients, a PPO trainer and an experiment harness that compares raw and
//! segmented training runs.

pub mod env;
pub mod frame;
pub mod nn;
pub mod pipeline;
pub mod ppo;
pub mod proto;
pub mod segment;

pub use frame::Frame;
pub mod harness;
