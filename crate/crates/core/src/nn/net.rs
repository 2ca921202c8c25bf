use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::orthogonal_init;
use super::tensor::{Scalar, Tensor};
use super::NnError;

/// One valid-padding convolution followed by ReLU.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

/// Architecture of a [`PolicyValueNet`]: conv stack, one hidden dense layer,
/// then a policy head and a value head sharing that hidden layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    pub in_channels: usize,
    pub in_height: usize,
    pub in_width: usize,
    pub convs: Vec<ConvSpec>,
    pub hidden: usize,
    pub actions: usize,
}

impl NetShape {
    /// The 3-conv + 2-dense network over a 4x84x84 frame stack.
    pub fn atari(actions: usize) -> Self {
        NetShape {
            in_channels: 4,
            in_height: 84,
            in_width: 84,
            convs: vec![
                ConvSpec { out_channels: 32, kernel: 8, stride: 4 },
                ConvSpec { out_channels: 64, kernel: 4, stride: 2 },
                ConvSpec { out_channels: 64, kernel: 3, stride: 1 },
            ],
            hidden: 512,
            actions,
        }
    }

    pub fn input_len(&self) -> usize {
        self.in_channels * self.in_height * self.in_width
    }

    fn geometry(&self) -> Result<Vec<ConvGeom>, NnError> {
        let (mut c, mut h, mut w) = (self.in_channels, self.in_height, self.in_width);
        let mut out = Vec::with_capacity(self.convs.len());
        for (i, spec) in self.convs.iter().enumerate() {
            if spec.kernel == 0 || spec.stride == 0 || spec.kernel > h || spec.kernel > w {
                return Err(NnError::Shape(format!(
                    "conv{i}: kernel {} stride {} does not fit a {h}x{w} input",
                    spec.kernel, spec.stride
                )));
            }
            let g = ConvGeom {
                in_c: c,
                in_h: h,
                in_w: w,
                out_c: spec.out_channels,
                k: spec.kernel,
                s: spec.stride,
                out_h: (h - spec.kernel) / spec.stride + 1,
                out_w: (w - spec.kernel) / spec.stride + 1,
            };
            c = g.out_c;
            h = g.out_h;
            w = g.out_w;
            out.push(g);
        }
        if self.actions == 0 || self.hidden == 0 {
            return Err(NnError::Shape("hidden size and action count must be >= 1".into()));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
struct ConvGeom {
    in_c: usize,
    in_h: usize,
    in_w: usize,
    out_c: usize,
    k: usize,
    s: usize,
    out_h: usize,
    out_w: usize,
}

impl ConvGeom {
    fn patch(&self) -> usize {
        self.in_c * self.k * self.k
    }

    fn positions(&self) -> usize {
        self.out_h * self.out_w
    }

    fn in_len(&self) -> usize {
        self.in_c * self.in_h * self.in_w
    }

    fn out_len(&self) -> usize {
        self.out_c * self.positions()
    }

    fn im2col<T: Scalar>(&self, input: &[T], cols: &mut [T]) {
        let p = self.positions();
        for c in 0..self.in_c {
            for ky in 0..self.k {
                for kx in 0..self.k {
                    let row = (c * self.k + ky) * self.k + kx;
                    let dst = &mut cols[row * p..(row + 1) * p];
                    for oy in 0..self.out_h {
                        let src_row = (c * self.in_h + oy * self.s + ky) * self.in_w + kx;
                        for ox in 0..self.out_w {
                            dst[oy * self.out_w + ox] = input[src_row + ox * self.s];
                        }
                    }
                }
            }
        }
    }

    fn col2im_add<T: Scalar>(&self, cols: &[T], input_grad: &mut [T]) {
        let p = self.positions();
        for c in 0..self.in_c {
            for ky in 0..self.k {
                for kx in 0..self.k {
                    let row = (c * self.k + ky) * self.k + kx;
                    let src = &cols[row * p..(row + 1) * p];
                    for oy in 0..self.out_h {
                        let dst_row = (c * self.in_h + oy * self.s + ky) * self.in_w + kx;
                        for ox in 0..self.out_w {
                            let g = &mut input_grad[dst_row + ox * self.s];
                            *g = *g + src[oy * self.out_w + ox];
                        }
                    }
                }
            }
        }
    }
}

struct ForwardCache<T> {
    input: Tensor<T>,
    /// Per conv layer: im2col buffers for the whole batch.
    cols: Vec<Vec<T>>,
    /// Per conv layer: post-ReLU activations for the whole batch.
    conv_out: Vec<Vec<T>>,
    hidden: Vec<T>,
}

/// Gradients laid out exactly like [`PolicyValueNet::params`].
#[derive(Clone, Debug)]
pub struct Gradients<T = f32> {
    pub tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn global_norm(&self) -> f64 {
        self.tensors.iter().map(Tensor::sum_squares).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: T) {
        for t in &mut self.tensors {
            t.data_mut().iter_mut().for_each(|v| *v = *v * factor);
        }
    }

    /// Rescales so the global L2 norm is at most `max_norm`; returns the norm before clipping.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        let coef = max_norm / (norm + 1e-6);
        if coef < 1.0 {
            self.scale(T::from_f64(coef));
        }
        norm
    }
}

/// Convolutional policy/value network with hand-written backpropagation.
pub struct PolicyValueNet<T = f32> {
    shape: NetShape,
    geoms: Vec<ConvGeom>,
    names: Vec<String>,
    params: Vec<Tensor<T>>,
    cache: Option<ForwardCache<T>>,
}

impl<T: Scalar> std::fmt::Debug for PolicyValueNet<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolicyValueNet")
            .field("shape", &self.shape)
            .field("parameters", &self.num_parameters())
            .finish()
    }
}

impl<T: Scalar> Clone for PolicyValueNet<T> {
    fn clone(&self) -> Self {
        PolicyValueNet {
            shape: self.shape.clone(),
            geoms: self.geoms.clone(),
            names: self.names.clone(),
            params: self.params.clone(),
            cache: None,
        }
    }
}

impl<T: Scalar> PolicyValueNet<T> {
    /// All weights and biases zero.
    pub fn zeros(shape: NetShape) -> Result<Self, NnError> {
        let geoms = shape.geometry()?;
        let mut names = Vec::new();
        let mut params = Vec::new();
        for (i, g) in geoms.iter().enumerate() {
            names.push(format!("conv{i}.weight"));
            params.push(Tensor::zeros(&[g.out_c, g.in_c, g.k, g.k]));
            names.push(format!("conv{i}.bias"));
            params.push(Tensor::zeros(&[g.out_c]));
        }
        let flat = flat_len(&shape, &geoms);
        for (name, rows, cols) in [
            ("fc", shape.hidden, flat),
            ("policy", shape.actions, shape.hidden),
            ("value", 1, shape.hidden),
        ] {
            names.push(format!("{name}.weight"));
            params.push(Tensor::zeros(&[rows, cols]));
            names.push(format!("{name}.bias"));
            params.push(Tensor::zeros(&[rows]));
        }
        Ok(PolicyValueNet {
            shape,
            geoms,
            names,
            params,
            cache: None,
        })
    }

    /// Orthogonal weights (gain sqrt(2) for hidden layers, 0.01 for the
    /// policy head, 1 for the value head) and zero biases.
    pub fn new<R: Rng + ?Sized>(shape: NetShape, rng: &mut R) -> Result<Self, NnError> {
        let mut net = Self::zeros(shape)?;
        let n_conv = net.geoms.len();
        for layer in 0..n_conv + 3 {
            let gain = if layer < n_conv + 1 {
                std::f64::consts::SQRT_2
            } else if layer == n_conv + 1 {
                0.01
            } else {
                1.0
            };
            let w = &net.params[2 * layer];
            let rows = w.shape()[0];
            let cols = w.len() / rows;
            let init = orthogonal_init::<T, R>(rows, cols, gain, rng);
            net.params[2 * layer].data_mut().copy_from_slice(init.data());
        }
        Ok(net)
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    /// Index of the logits-head bias in [`Self::params`].
    pub fn policy_bias_index(&self) -> usize {
        2 * self.geoms.len() + 3
    }

    /// Same parameters in another element type, without any forward cache.
    pub fn cast<U: Scalar>(&self) -> PolicyValueNet<U> {
        PolicyValueNet {
            shape: self.shape.clone(),
            geoms: self.geoms.clone(),
            names: self.names.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
            cache: None,
        }
    }

    fn batch_size(&self, obs: &Tensor<T>) -> Result<usize, NnError> {
        let s = &self.shape;
        let want = [s.in_channels, s.in_height, s.in_width];
        match obs.shape() {
            [b, rest @ ..] if rest == want && *b > 0 => Ok(*b),
            other => Err(NnError::Shape(format!(
                "observation batch must be Bx{}x{}x{}, got {:?}",
                want[0], want[1], want[2], other
            ))),
        }
    }

    /// Inference-only forward pass: `(logits [B, A], values [B])`.
    pub fn forward(&self, obs: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>), NnError> {
        let (out, _) = self.run_forward(obs)?;
        Ok(out)
    }

    /// Forward pass that keeps the activations needed by [`Self::backward`].
    pub fn forward_train(&mut self, obs: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>), NnError> {
        let (out, cache) = self.run_forward(obs)?;
        self.cache = Some(cache);
        Ok(out)
    }

    fn run_forward(
        &self,
        obs: &Tensor<T>,
    ) -> Result<((Tensor<T>, Tensor<T>), ForwardCache<T>), NnError> {
        let batch = self.batch_size(obs)?;
        let mut cols_all = Vec::with_capacity(self.geoms.len());
        let mut outs_all: Vec<Vec<T>> = Vec::with_capacity(self.geoms.len());

        for (l, g) in self.geoms.iter().enumerate() {
            let (patch, pos) = (g.patch(), g.positions());
            let mut cols = vec![T::zero(); batch * patch * pos];
            let mut out = vec![T::zero(); batch * g.out_len()];
            let weight = self.params[2 * l].data();
            let bias = self.params[2 * l + 1].data();
            for b in 0..batch {
                let input = match l {
                    0 => &obs.data()[b * g.in_len()..(b + 1) * g.in_len()],
                    _ => &outs_all[l - 1][b * g.in_len()..(b + 1) * g.in_len()],
                };
                let c = &mut cols[b * patch * pos..(b + 1) * patch * pos];
                g.im2col(input, c);
                let o = &mut out[b * g.out_len()..(b + 1) * g.out_len()];
                for (oc, row) in o.chunks_mut(pos).enumerate() {
                    row.fill(bias[oc]);
                }
                T::gemm(
                    g.out_c, patch, pos, T::one(), weight, patch as isize, 1, c, pos as isize, 1,
                    T::one(), o, pos as isize, 1,
                );
                relu_inplace(o);
            }
            cols_all.push(cols);
            outs_all.push(out);
        }

        let flat = flat_len(&self.shape, &self.geoms);
        let features: &[T] = match outs_all.last() {
            Some(last) => last,
            None => obs.data(),
        };
        let n_conv = self.geoms.len();
        let hidden = self.shape.hidden;
        let mut h = dense(features, batch, flat, &self.params[2 * n_conv], &self.params[2 * n_conv + 1]);
        relu_inplace(&mut h);
        let logits = dense(&h, batch, hidden, &self.params[2 * n_conv + 2], &self.params[2 * n_conv + 3]);
        let values = dense(&h, batch, hidden, &self.params[2 * n_conv + 4], &self.params[2 * n_conv + 5]);

        let logits = Tensor::from_vec(&[batch, self.shape.actions], logits)?;
        let values = Tensor::from_vec(&[batch], values)?;
        if !logits.is_finite() || !values.is_finite() {
            return Err(NnError::NonFinite("forward output".into()));
        }
        let cache = ForwardCache {
            input: obs.clone(),
            cols: cols_all,
            conv_out: outs_all,
            hidden: h,
        };
        Ok(((logits, values), cache))
    }

    /// Backpropagates upstream gradients on logits `[B, A]` and values `[B]`
    /// through the batch seen by the preceding [`Self::forward_train`].
    pub fn backward(
        &mut self,
        obs: &Tensor<T>,
        grad_logits: &Tensor<T>,
        grad_values: &Tensor<T>,
    ) -> Result<Gradients<T>, NnError> {
        let cache = self.cache.take().ok_or(NnError::NoForwardCache)?;
        if cache.input.shape() != obs.shape() || cache.input.data() != obs.data() {
            return Err(NnError::NoForwardCache);
        }
        let batch = obs.shape()[0];
        let actions = self.shape.actions;
        let hidden = self.shape.hidden;
        if grad_logits.shape() != [batch, actions] || grad_values.shape() != [batch] {
            return Err(NnError::Shape(format!(
                "upstream gradients must be [{batch}, {actions}] and [{batch}], got {:?} and {:?}",
                grad_logits.shape(),
                grad_values.shape()
            )));
        }

        let mut grads: Vec<Tensor<T>> = self.params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        let n_conv = self.geoms.len();
        let flat = flat_len(&self.shape, &self.geoms);

        // Heads.
        let mut d_hidden = vec![T::zero(); batch * hidden];
        for (idx, upstream, width) in [
            (2 * n_conv + 2, grad_logits.data(), actions),
            (2 * n_conv + 4, grad_values.data(), 1),
        ] {
            dense_backward(
                &cache.hidden,
                upstream,
                batch,
                hidden,
                width,
                &self.params[idx],
                &mut grads,
                idx,
                Some(&mut d_hidden),
            );
        }
        relu_backward(&mut d_hidden, &cache.hidden);

        // Hidden dense layer.
        let features: &[T] = match cache.conv_out.last() {
            Some(last) => last,
            None => cache.input.data(),
        };
        let mut d_features = if n_conv > 0 { Some(vec![T::zero(); batch * flat]) } else { None };
        dense_backward(
            features,
            &d_hidden,
            batch,
            flat,
            hidden,
            &self.params[2 * n_conv],
            &mut grads,
            2 * n_conv,
            d_features.as_mut(),
        );

        // Conv stack in reverse.
        let mut d_out = d_features.unwrap_or_default();
        for l in (0..n_conv).rev() {
            let g = self.geoms[l];
            let (patch, pos) = (g.patch(), g.positions());
            relu_backward(&mut d_out, &cache.conv_out[l]);
            let weight = self.params[2 * l].data();
            let mut d_in = if l > 0 { vec![T::zero(); batch * g.in_len()] } else { Vec::new() };
            let mut d_cols = vec![T::zero(); patch * pos];
            for b in 0..batch {
                let dpre = &d_out[b * g.out_len()..(b + 1) * g.out_len()];
                let cols = &cache.cols[l][b * patch * pos..(b + 1) * patch * pos];
                // dW += dpre . cols^T
                T::gemm(
                    g.out_c, pos, patch, T::one(), dpre, pos as isize, 1, cols, 1, pos as isize,
                    T::one(), grads[2 * l].data_mut(), patch as isize, 1,
                );
                let db = grads[2 * l + 1].data_mut();
                for (oc, row) in dpre.chunks(pos).enumerate() {
                    db[oc] = db[oc] + row.iter().copied().sum();
                }
                if l > 0 {
                    // dcols = W^T . dpre
                    T::gemm(
                        patch, g.out_c, pos, T::one(), weight, 1, patch as isize, dpre, pos as isize, 1,
                        T::zero(), &mut d_cols, pos as isize, 1,
                    );
                    g.col2im_add(&d_cols, &mut d_in[b * g.in_len()..(b + 1) * g.in_len()]);
                }
            }
            d_out = d_in;
        }

        Ok(Gradients { tensors: grads })
    }

    /// Writes the parameters as a simple little-endian binary blob.
    pub fn save<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"PVN1")?;
        w.write_all(&(self.params.len() as u32).to_le_bytes())?;
        for (name, p) in self.names.iter().zip(&self.params) {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(p.shape().len() as u32).to_le_bytes())?;
            for d in p.shape() {
                w.write_all(&(*d as u32).to_le_bytes())?;
            }
            for v in p.data() {
                w.write_all(&(v.as_f64() as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Loads parameters written by [`Self::save`] into a net of matching shape.
    pub fn load_params<R: Read>(&mut self, mut r: R) -> Result<(), NnError> {
        let read_u32 = |r: &mut R| -> Result<u32, NnError> {
            let mut buf = [0u8; 4];
            r.read_exact(&mut buf).map_err(|e| NnError::Format(e.to_string()))?;
            Ok(u32::from_le_bytes(buf))
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| NnError::Format(e.to_string()))?;
        if &magic != b"PVN1" {
            return Err(NnError::Format("bad magic".into()));
        }
        let count = read_u32(&mut r)? as usize;
        if count != self.params.len() {
            return Err(NnError::Format(format!("expected {} tensors, found {count}", self.params.len())));
        }
        for i in 0..count {
            let name_len = read_u32(&mut r)? as usize;
            let mut name = vec![0u8; name_len];
            r.read_exact(&mut name).map_err(|e| NnError::Format(e.to_string()))?;
            if name != self.names[i].as_bytes() {
                return Err(NnError::Format(format!("tensor {i}: unexpected name")));
            }
            let ndim = read_u32(&mut r)? as usize;
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(read_u32(&mut r)? as usize);
            }
            if dims != self.params[i].shape() {
                return Err(NnError::Format(format!("{}: shape {:?} does not match", self.names[i], dims)));
            }
            for v in self.params[i].data_mut() {
                *v = T::from_f64(f32::from_bits(read_u32(&mut r)?) as f64);
            }
        }
        Ok(())
    }
}

fn flat_len(shape: &NetShape, geoms: &[ConvGeom]) -> usize {
    geoms.last().map_or(shape.input_len(), ConvGeom::out_len)
}

fn relu_inplace<T: Scalar>(x: &mut [T]) {
    for v in x {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Zeroes the gradient wherever the ReLU output was not positive.
fn relu_backward<T: Scalar>(grad: &mut [T], activated: &[T]) {
    for (g, a) in grad.iter_mut().zip(activated) {
        if *a <= T::zero() {
            *g = T::zero();
        }
    }
}

/// `x [B, in] -> x . W^T + b` with `W [out, in]`.
fn dense<T: Scalar>(x: &[T], batch: usize, inputs: usize, weight: &Tensor<T>, bias: &Tensor<T>) -> Vec<T> {
    let outputs = weight.shape()[0];
    let mut y = Vec::with_capacity(batch * outputs);
    for _ in 0..batch {
        y.extend_from_slice(bias.data());
    }
    T::gemm(
        batch, inputs, outputs, T::one(), x, inputs as isize, 1, weight.data(), 1, inputs as isize,
        T::one(), &mut y, outputs as isize, 1,
    );
    y
}

#[allow(clippy::too_many_arguments)]
fn dense_backward<T: Scalar>(
    x: &[T],
    upstream: &[T],
    batch: usize,
    inputs: usize,
    outputs: usize,
    weight: &Tensor<T>,
    grads: &mut [Tensor<T>],
    weight_idx: usize,
    d_input: Option<&mut Vec<T>>,
) {
    // dW [out, in] = upstream^T [out, B] . x [B, in]
    T::gemm(
        outputs, batch, inputs, T::one(), upstream, 1, outputs as isize, x, inputs as isize, 1,
        T::one(), grads[weight_idx].data_mut(), inputs as isize, 1,
    );
    let db = grads[weight_idx + 1].data_mut();
    for row in upstream.chunks(outputs) {
        for (d, u) in db.iter_mut().zip(row) {
            *d = *d + *u;
        }
    }
    if let Some(dx) = d_input {
        // dx [B, in] += upstream [B, out] . W [out, in]
        T::gemm(
            batch, outputs, inputs, T::one(), upstream, outputs as isize, 1, weight.data(), inputs as isize, 1,
            T::one(), dx, inputs as isize, 1,
        );
    }
}
