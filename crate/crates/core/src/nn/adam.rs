use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Adam optimizer state with bias correction; epsilon sits outside the square root.
#[derive(Clone, Debug)]
pub struct AdamState<T = f32> {
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    first: Vec<Tensor<T>>,
    second: Vec<Tensor<T>>,
}

impl<T: Scalar> AdamState<T> {
    /// Zeroed moments shaped like `params`, with beta1=0.9, beta2=0.999, eps=1e-5.
    pub fn new(params: &[Tensor<T>]) -> Self {
        AdamState {
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-5,
            first: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            second: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
        }
    }

    pub fn first_moments(&self) -> &[Tensor<T>] {
        &self.first
    }

    pub fn second_moments(&self) -> &[Tensor<T>] {
        &self.second
    }
}

/// One bias-corrected Adam update. `names` is used only for error messages.
///
/// Nothing is modified when any gradient is non-finite.
pub fn adam_step<T: Scalar>(
    params: &mut [Tensor<T>],
    grads: &[Tensor<T>],
    names: &[String],
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<(), NnError> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(NnError::InvalidArgument(format!("learning rate must be > 0, got {lr}")));
    }
    if params.len() != grads.len() || params.len() != state.first.len() {
        return Err(NnError::Shape(format!(
            "adam: {} params, {} grads, {} moment slots",
            params.len(),
            grads.len(),
            state.first.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        let name = names.get(i).map_or_else(|| format!("param{i}"), Clone::clone);
        if p.shape() != g.shape() || p.shape() != state.first[i].shape() {
            return Err(NnError::Shape(format!("{name}: gradient shape {:?} vs {:?}", g.shape(), p.shape())));
        }
        if !g.is_finite() {
            return Err(NnError::NonFinite(format!("gradient of {name}")));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);
    let (b1t, b2t) = (T::from_f64(b1), T::from_f64(b2));
    let (one_b1, one_b2) = (T::from_f64(1.0 - b1), T::from_f64(1.0 - b2));
    let (bc1t, bc2t) = (T::from_f64(bc1), T::from_f64(bc2));
    let (lr_t, eps) = (T::from_f64(lr), T::from_f64(state.eps));

    for (i, p) in params.iter_mut().enumerate() {
        let m = state.first[i].data_mut();
        let v = state.second[i].data_mut();
        for (((pv, gv), mv), vv) in p.data_mut().iter_mut().zip(grads[i].data()).zip(m).zip(v) {
            *mv = b1t * *mv + one_b1 * *gv;
            *vv = b2t * *vv + one_b2 * *gv * *gv;
            let m_hat = *mv / bc1t;
            let v_hat = *vv / bc2t;
            *pv = *pv - lr_t * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
