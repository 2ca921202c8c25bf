use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PpoError, RolloutBuffer};
use crate::nn::{adam_step, log_softmax, AdamState, Gradients, PolicyValueNet, Scalar, Tensor};

/// PPO hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpoHyper {
    pub clip_coef: f64,
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub update_epochs: usize,
    pub num_minibatches: usize,
    pub num_steps: usize,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub max_grad_norm: f64,
    pub total_timesteps: u64,
    pub norm_adv: bool,
    pub anneal_lr: bool,
    pub clip_vloss: bool,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            clip_coef: 0.25,
            learning_rate: 2.5e-3,
            gamma: 0.99,
            gae_lambda: 0.95,
            update_epochs: 2,
            num_minibatches: 8,
            num_steps: 128,
            vf_coef: 0.5,
            ent_coef: 0.01,
            max_grad_norm: 0.5,
            total_timesteps: 20_000,
            norm_adv: true,
            anneal_lr: true,
            clip_vloss: true,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<(), PpoError> {
        let bad = |msg: &str| Err(PpoError::Config(msg.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae lambda must be in [0, 1]");
        }
        if !(self.clip_coef > 0.0) {
            return bad("clip coefficient must be > 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be > 0");
        }
        if self.num_steps == 0 || self.num_minibatches == 0 || self.num_steps % self.num_minibatches != 0 {
            return bad("num_minibatches must divide num_steps");
        }
        if self.update_epochs == 0 {
            return bad("update epochs must be >= 1");
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("max grad norm must be > 0");
        }
        Ok(())
    }

    pub fn minibatch_size(&self) -> usize {
        self.num_steps / self.num_minibatches
    }

    /// Number of collect/update cycles in a run.
    pub fn num_updates(&self) -> u64 {
        self.total_timesteps / self.num_steps as u64
    }

    /// Linearly annealed learning rate for the 1-based `update`.
    pub fn learning_rate_at(&self, update: u64) -> f64 {
        if !self.anneal_lr {
            return self.learning_rate;
        }
        let frac = 1.0 - (update.saturating_sub(1)) as f64 / self.num_updates().max(1) as f64;
        self.learning_rate * frac
    }
}

/// Loss terms and diagnostics of one minibatch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MinibatchStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clipfrac: f64,
    /// Largest `|ratio - 1|` in the minibatch.
    pub max_ratio_deviation: f64,
}

/// Means over every minibatch of the update, plus the very first minibatch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clipfrac: f64,
    pub first: MinibatchStats,
}

/// Minibatch view used by the loss.
pub struct MinibatchInputs<'a> {
    pub actions: &'a [usize],
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
    pub old_values: &'a [f64],
}

/// Advantages rescaled to zero mean and unit (sample) standard deviation.
/// Falls back to all zeros when the standard deviation is below 1e-8.
pub fn normalize_advantages(adv: &[f64]) -> Vec<f64> {
    let n = adv.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    if std < 1e-8 {
        return vec![0.0; n];
    }
    adv.iter().map(|a| (a - mean) / (std + 1e-8)).collect()
}

/// Clipped-surrogate loss for one minibatch and its gradient with respect to
/// the logits and values. Returns `(stats, total loss, d logits, d values)`.
pub fn minibatch_loss(
    logits: &[f64],
    values: &[f64],
    actions_count: usize,
    mb: &MinibatchInputs<'_>,
    hyper: &PpoHyper,
) -> Result<(MinibatchStats, f64, Vec<f64>, Vec<f64>), PpoError> {
    let m = mb.actions.len();
    let eps = hyper.clip_coef;
    let adv = if hyper.norm_adv { normalize_advantages(mb.advantages) } else { mb.advantages.to_vec() };
    let inv_m = 1.0 / m as f64;

    let mut stats = MinibatchStats::default();
    let mut d_logits = vec![0.0; m * actions_count];
    let mut d_values = vec![0.0; m];
    let mut clipped = 0usize;

    for i in 0..m {
        let row = &logits[i * actions_count..(i + 1) * actions_count];
        let lp = log_softmax(row)?;
        let probs: Vec<f64> = lp.iter().map(|v| v.exp()).collect();
        let entropy = crate::nn::entropy(&lp);
        let a = mb.actions[i];
        let log_ratio = lp[a] - mb.old_log_probs[i];
        let ratio = log_ratio.exp();

        stats.approx_kl += ((ratio - 1.0) - log_ratio) * inv_m;
        stats.max_ratio_deviation = stats.max_ratio_deviation.max((ratio - 1.0).abs());
        if (ratio - 1.0).abs() > eps {
            clipped += 1;
        }

        // Policy term: max(-A r, -A clamp(r)).
        let clamped = ratio.clamp(1.0 - eps, 1.0 + eps);
        let unclipped_loss = -adv[i] * ratio;
        let clipped_loss = -adv[i] * clamped;
        let (pg, d_logp) = if unclipped_loss >= clipped_loss {
            (unclipped_loss, -adv[i] * ratio)
        } else {
            (clipped_loss, 0.0)
        };
        stats.policy_loss += pg * inv_m;
        stats.entropy += entropy * inv_m;

        // d logp(a) / d logit_j = 1[j = a] - p_j; d H / d logit_j = -p_j (log p_j + H).
        let d_row = &mut d_logits[i * actions_count..(i + 1) * actions_count];
        for j in 0..actions_count {
            let onehot = if j == a { 1.0 } else { 0.0 };
            let d_entropy = -probs[j] * (lp[j] + entropy);
            d_row[j] = inv_m * (d_logp * (onehot - probs[j]) - hyper.ent_coef * d_entropy);
        }

        // Value term.
        let v = values[i];
        let err = v - mb.returns[i];
        let (sq, d_v) = if hyper.clip_vloss {
            let delta = v - mb.old_values[i];
            let v_clipped = mb.old_values[i] + delta.clamp(-eps, eps);
            let err_clipped = v_clipped - mb.returns[i];
            if err * err >= err_clipped * err_clipped {
                (err * err, 2.0 * err)
            } else {
                let inside = delta.abs() < eps;
                (err_clipped * err_clipped, if inside { 2.0 * err_clipped } else { 0.0 })
            }
        } else {
            (err * err, 2.0 * err)
        };
        stats.value_loss += 0.5 * sq * inv_m;
        d_values[i] = hyper.vf_coef * 0.5 * d_v * inv_m;
    }
    stats.clipfrac = clipped as f64 * inv_m;
    let total = stats.policy_loss - hyper.ent_coef * stats.entropy + hyper.vf_coef * stats.value_loss;
    if !total.is_finite() {
        return Err(PpoError::NonFiniteLoss {
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
        });
    }
    Ok((stats, total, d_logits, d_values))
}

/// Gathers rows `idx` of the buffer into a network batch.
pub fn gather_obs<T: Scalar>(buffer: &RolloutBuffer, idx: &[usize], input_shape: [usize; 3]) -> Tensor<T> {
    let mut data = Vec::with_capacity(idx.len() * buffer.obs_len);
    for &i in idx {
        data.extend(buffer.obs_row(i).iter().map(|v| T::from_f64(*v as f64)));
    }
    Tensor::from_vec(&[idx.len(), input_shape[0], input_shape[1], input_shape[2]], data)
        .expect("buffer rows match the network input")
}

/// Gradient of the PPO objective on one minibatch, globally norm-clipped.
pub fn minibatch_gradients<T: Scalar>(
    net: &mut PolicyValueNet<T>,
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[f64],
    idx: &[usize],
    hyper: &PpoHyper,
) -> Result<(MinibatchStats, Gradients<T>), PpoError> {
    let shape = net.shape().clone();
    let obs = gather_obs::<T>(buffer, idx, [shape.in_channels, shape.in_height, shape.in_width]);
    let (logits, values) = net.forward_train(&obs)?;
    let pick = |src: &[f64]| idx.iter().map(|&i| src[i]).collect::<Vec<_>>();
    let actions: Vec<usize> = idx.iter().map(|&i| buffer.actions[i]).collect();
    let old_lp = pick(&buffer.log_probs);
    let adv = pick(advantages);
    let ret = pick(returns);
    let old_v = pick(&buffer.values);
    let mb = MinibatchInputs {
        actions: &actions,
        old_log_probs: &old_lp,
        advantages: &adv,
        returns: &ret,
        old_values: &old_v,
    };
    let logits64: Vec<f64> = logits.data().iter().map(|v| v.as_f64()).collect();
    let values64: Vec<f64> = values.data().iter().map(|v| v.as_f64()).collect();
    let (stats, _total, d_logits, d_values) = minibatch_loss(&logits64, &values64, shape.actions, &mb, hyper)?;
    let d_logits = Tensor::from_vec(logits.shape(), d_logits.into_iter().map(T::from_f64).collect())?;
    let d_values = Tensor::from_vec(values.shape(), d_values.into_iter().map(T::from_f64).collect())?;
    let mut grads = net.backward(&obs, &d_logits, &d_values)?;
    grads.clip_global_norm(hyper.max_grad_norm);
    Ok((stats, grads))
}

/// Runs `update_epochs` passes of shuffled minibatch updates over the buffer.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update<T: Scalar, R: Rng + ?Sized>(
    net: &mut PolicyValueNet<T>,
    optimizer: &mut AdamState<T>,
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[f64],
    hyper: &PpoHyper,
    learning_rate: f64,
    rng: &mut R,
) -> Result<UpdateStats, PpoError> {
    hyper.validate()?;
    let n = buffer.len();
    if n != hyper.num_steps || advantages.len() != n || returns.len() != n {
        return Err(PpoError::Shape(format!(
            "buffer has {n} steps, advantages {}, returns {}, expected {}",
            advantages.len(),
            returns.len(),
            hyper.num_steps
        )));
    }
    let mb_size = hyper.minibatch_size();
    let mut order: Vec<usize> = (0..n).collect();
    let mut out = UpdateStats::default();
    let mut count = 0usize;
    for _epoch in 0..hyper.update_epochs {
        order.shuffle(rng);
        for idx in order.chunks(mb_size) {
            let (stats, grads) = minibatch_gradients(net, buffer, advantages, returns, idx, hyper)?;
            if count == 0 {
                out.first = stats;
            }
            count += 1;
            out.policy_loss += stats.policy_loss;
            out.value_loss += stats.value_loss;
            out.entropy += stats.entropy;
            out.approx_kl += stats.approx_kl;
            out.clipfrac += stats.clipfrac;
            let names = net.param_names().to_vec();
            adam_step(net.params_mut(), &grads.tensors, &names, optimizer, learning_rate)?;
        }
    }
    let c = count as f64;
    out.policy_loss /= c;
    out.value_loss /= c;
    out.entropy /= c;
    out.approx_kl /= c;
    out.clipfrac /= c;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hyper_matches_run_settings() {
        let h = PpoHyper::default();
        h.validate().unwrap();
        assert_eq!(h.minibatch_size(), 16);
        assert_eq!(h.num_updates(), 156);
        assert_eq!(PpoHyper { total_timesteps: 256, ..h.clone() }.num_updates(), 2);
        assert_eq!(h.learning_rate_at(1), 2.5e-3);
        assert!((h.learning_rate_at(157)).abs() < 1e-12 || h.learning_rate_at(156) > 0.0);
    }

    #[test]
    fn hyper_validation() {
        let h = PpoHyper::default();
        assert!(PpoHyper { num_minibatches: 7, ..h.clone() }.validate().is_err());
        assert!(PpoHyper { gamma: 0.0, ..h.clone() }.validate().is_err());
        assert!(PpoHyper { gae_lambda: 1.5, ..h.clone() }.validate().is_err());
        assert!(PpoHyper { clip_coef: 0.0, ..h }.validate().is_err());
    }

    #[test]
    fn equal_advantages_normalize_to_zero() {
        assert_eq!(normalize_advantages(&[2.5; 16]), vec![0.0; 16]);
        let n = normalize_advantages(&[1.0, 2.0, 3.0, 4.0]);
        let mean: f64 = n.iter().sum::<f64>() / 4.0;
        let var: f64 = n.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn clip_fraction_counts_ratios_outside_band() {
        // Two actions, uniform new policy; old log-probs chosen so ratios are 0.5, 1.0, 1.1, 2.0.
        let lp_new = 0.5f64.ln();
        let ratios = [0.5, 1.0, 1.1, 2.0];
        let old: Vec<f64> = ratios.iter().map(|r: &f64| lp_new - r.ln()).collect();
        let logits = vec![0.0; 8];
        let values = vec![0.0; 4];
        let mb = MinibatchInputs {
            actions: &[0, 1, 0, 1],
            old_log_probs: &old,
            advantages: &[1.0, -1.0, 0.5, 2.0],
            returns: &[0.0; 4],
            old_values: &[0.0; 4],
        };
        let (stats, ..) = minibatch_loss(&logits, &values, 2, &mb, &PpoHyper::default()).unwrap();
        assert_eq!(stats.clipfrac, 0.5);
        assert!((stats.max_ratio_deviation - 1.0).abs() < 1e-12);
    }
}
