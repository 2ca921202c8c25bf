use rand::Rng;

use super::tensor::Scalar;
use super::NnError;

/// A sampled action together with its log-probability and the policy entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CategoricalSample {
    pub action: usize,
    pub log_prob: f64,
    pub entropy: f64,
}

/// Max-subtracted log-softmax, computed in `f64`.
pub fn log_softmax<T: Scalar>(logits: &[T]) -> Result<Vec<f64>, NnError> {
    if logits.is_empty() {
        return Err(NnError::InvalidArgument("empty logits".into()));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFinite("logits".into()));
    }
    let max = logits.iter().map(|v| v.as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|v| (v.as_f64() - max).exp()).sum::<f64>().ln() + max;
    Ok(logits.iter().map(|v| v.as_f64() - lse).collect())
}

/// `-sum p log p` for the given log-probabilities.
pub fn entropy(log_probs: &[f64]) -> f64 {
    -log_probs
        .iter()
        .map(|lp| if lp.is_finite() { lp.exp() * lp } else { 0.0 })
        .sum::<f64>()
}

/// Samples an action from `softmax(logits)` by inverting the CDF.
pub fn categorical<T: Scalar, R: Rng + ?Sized>(logits: &[T], rng: &mut R) -> Result<CategoricalSample, NnError> {
    let log_probs = log_softmax(logits)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut action = log_probs.len() - 1;
    for (i, lp) in log_probs.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            action = i;
            break;
        }
    }
    // Rounding can leave the tail unreachable; never pick a zero-probability action.
    while log_probs[action] == f64::NEG_INFINITY && action > 0 {
        action -= 1;
    }
    Ok(CategoricalSample {
        action,
        log_prob: log_probs[action],
        entropy: entropy(&log_probs),
    })
}
