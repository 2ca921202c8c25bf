use rand::Rng;

use super::PpoError;
use crate::nn::{categorical, PolicyValueNet, Scalar};
use crate::pipeline::{ObsTensor, Pipeline};

/// Fixed-length trajectory storage for one rollout.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutBuffer {
    pub obs_len: usize,
    /// `len * obs_len` stacked observations, row per step.
    pub obs: Vec<f32>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    /// Episode ended with this transition.
    pub dones: Vec<bool>,
    /// Value estimate of the state after the last step.
    pub bootstrap_value: f64,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn obs_row(&self, i: usize) -> &[f32] {
        &self.obs[i * self.obs_len..(i + 1) * self.obs_len]
    }

    pub fn is_finite(&self) -> bool {
        self.obs.iter().all(|v| v.is_finite())
            && self.log_probs.iter().chain(&self.rewards).chain(&self.values).all(|v| v.is_finite())
            && self.bootstrap_value.is_finite()
    }
}

/// A finished episode, as reported by the collector.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// Global step at which the episode ended.
    pub global_step: u64,
    /// Undiscounted sum of unclipped rewards.
    pub episodic_return: f64,
    pub episodic_length: u64,
}

/// Drives a pipeline with the current policy, auto-resetting at episode end.
///
/// Episode `i` is reset with `seed + i`.
pub struct RolloutCollector {
    pipeline: Pipeline,
    obs: ObsTensor,
    seed: u64,
    episodes: u64,
    episode_return: f64,
    episode_length: u64,
    global_step: u64,
}

impl RolloutCollector {
    pub fn new(mut pipeline: Pipeline, seed: u64) -> Result<Self, PpoError> {
        let obs = pipeline.reset(seed)?;
        Ok(RolloutCollector {
            pipeline,
            obs,
            seed,
            episodes: 0,
            episode_return: 0.0,
            episode_length: 0,
            global_step: 0,
        })
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn current_obs(&self) -> &ObsTensor {
        &self.obs
    }

    /// Collects exactly `num_steps` transitions. `on_step` sees the pipeline
    /// after every step, plus the episode that step finished, if any.
    pub fn collect<T: Scalar, R: Rng + ?Sized>(
        &mut self,
        net: &PolicyValueNet<T>,
        num_steps: usize,
        rng: &mut R,
        mut on_step: impl FnMut(u64, &Pipeline, Option<&EpisodeRecord>),
    ) -> Result<(RolloutBuffer, Vec<EpisodeRecord>), PpoError> {
        let obs_len = self.obs.data().len();
        let mut buf = RolloutBuffer {
            obs_len,
            obs: Vec::with_capacity(num_steps * obs_len),
            actions: Vec::with_capacity(num_steps),
            log_probs: Vec::with_capacity(num_steps),
            rewards: Vec::with_capacity(num_steps),
            values: Vec::with_capacity(num_steps),
            dones: Vec::with_capacity(num_steps),
            bootstrap_value: 0.0,
        };
        let mut finished = Vec::new();
        for _ in 0..num_steps {
            let (logits, values) = net.forward(&self.obs.to_batch().cast())?;
            let sample = categorical(logits.data(), rng)?;
            buf.obs.extend_from_slice(self.obs.data());
            buf.actions.push(sample.action);
            buf.log_probs.push(sample.log_prob);
            buf.values.push(values.data()[0].as_f64());

            let step = self.pipeline.step(sample.action)?;
            self.global_step += 1;
            self.episode_return += step.raw_reward;
            self.episode_length += 1;
            buf.rewards.push(step.reward);
            buf.dones.push(step.done());
            if step.done() {
                let record = EpisodeRecord {
                    global_step: self.global_step,
                    episodic_return: self.episode_return,
                    episodic_length: self.episode_length,
                };
                on_step(self.global_step, &self.pipeline, Some(&record));
                finished.push(record);
                self.episodes += 1;
                self.episode_return = 0.0;
                self.episode_length = 0;
                self.obs = self.pipeline.reset(self.seed.wrapping_add(self.episodes))?;
            } else {
                on_step(self.global_step, &self.pipeline, None);
                self.obs = step.obs;
            }
        }
        let (_, values) = net.forward(&self.obs.to_batch().cast())?;
        buf.bootstrap_value = values.data()[0].as_f64();
        Ok((buf, finished))
    }
}
