//! Independent reference implementations used as test oracles. None of this
//! calls into the code under test beyond reading parameter tensors.

#![allow(dead_code)]

use rand::Rng;
use segrl::nn::{ConvSpec, NetShape, PolicyValueNet, Tensor};

/// Small architecture that still exercises strides, several channels and both heads.
pub fn tiny_shape() -> NetShape {
    NetShape {
        in_channels: 2,
        in_height: 9,
        in_width: 9,
        convs: vec![
            ConvSpec { out_channels: 3, kernel: 3, stride: 2 },
            ConvSpec { out_channels: 4, kernel: 2, stride: 1 },
        ],
        hidden: 5,
        actions: 3,
    }
}

/// Net with every parameter drawn uniformly from [-0.5, 0.5].
pub fn random_net<R: Rng>(shape: NetShape, rng: &mut R) -> PolicyValueNet<f64> {
    let mut net = PolicyValueNet::<f64>::zeros(shape).unwrap();
    for p in net.params_mut() {
        for v in p.data_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    net
}

pub fn random_obs<R: Rng>(shape: &NetShape, batch: usize, rng: &mut R) -> Tensor<f64> {
    let n = batch * shape.input_len();
    let data = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    Tensor::from_vec(&[batch, shape.in_channels, shape.in_height, shape.in_width], data).unwrap()
}

/// Direct nested-loop forward pass over flat parameter slices laid out as
/// conv weights `[out, in, k, k]`, dense weights `[out, in]`, CHW flattening.
pub fn reference_forward(shape: &NetShape, params: &[Vec<f64>], obs: &[f64], batch: usize) -> (Vec<f64>, Vec<f64>) {
    let (l, v, _) = reference_forward_pattern(shape, params, obs, batch);
    (l, v)
}

/// Like [`reference_forward`], also returning which ReLU units were active.
pub fn reference_forward_pattern(
    shape: &NetShape,
    params: &[Vec<f64>],
    obs: &[f64],
    batch: usize,
) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut pattern = Vec::new();
    let mut logits = Vec::new();
    let mut values = Vec::new();
    for b in 0..batch {
        let n = shape.input_len();
        let mut act = obs[b * n..(b + 1) * n].to_vec();
        let (mut c, mut h, mut w) = (shape.in_channels, shape.in_height, shape.in_width);
        for (l, spec) in shape.convs.iter().enumerate() {
            let (wt, bias) = (&params[2 * l], &params[2 * l + 1]);
            let oh = (h - spec.kernel) / spec.stride + 1;
            let ow = (w - spec.kernel) / spec.stride + 1;
            let mut out = vec![0.0; spec.out_channels * oh * ow];
            for o in 0..spec.out_channels {
                for y in 0..oh {
                    for x in 0..ow {
                        let mut s = bias[o];
                        for i in 0..c {
                            for ky in 0..spec.kernel {
                                for kx in 0..spec.kernel {
                                    let wi = ((o * c + i) * spec.kernel + ky) * spec.kernel + kx;
                                    let xi = (i * h + y * spec.stride + ky) * w + x * spec.stride + kx;
                                    s += wt[wi] * act[xi];
                                }
                            }
                        }
                        pattern.push(s > 0.0);
                        out[(o * oh + y) * ow + x] = s.max(0.0);
                    }
                }
            }
            act = out;
            c = spec.out_channels;
            h = oh;
            w = ow;
        }
        let nc = shape.convs.len();
        let dense = |wt: &[f64], bias: &[f64], input: &[f64], rows: usize| -> Vec<f64> {
            (0..rows)
                .map(|r| bias[r] + (0..input.len()).map(|j| wt[r * input.len() + j] * input[j]).sum::<f64>())
                .collect()
        };
        let pre = dense(&params[2 * nc], &params[2 * nc + 1], &act, shape.hidden);
        pattern.extend(pre.iter().map(|&v| v > 0.0));
        let hidden: Vec<f64> = pre.into_iter().map(|v| v.max(0.0)).collect();
        logits.extend(dense(&params[2 * nc + 2], &params[2 * nc + 3], &hidden, shape.actions));
        values.extend(dense(&params[2 * nc + 4], &params[2 * nc + 5], &hidden, 1));
    }
    (logits, values, pattern)
}

/// Result of checking one net against central finite differences.
pub struct GradCheck {
    pub max_rel_err: f64,
    pub max_forward_err: f64,
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a ReLU kink.
    pub skipped: usize,
}

/// Relative-error floor: gradients smaller than this are compared absolutely.
pub const GRAD_FLOOR: f64 = 1e-6;

/// Compares the analytic gradient of `sum(gl * logits) + sum(gv * values)`
/// with central differences of the reference forward, for every parameter.
pub fn grad_check<R: Rng>(rng: &mut R) -> GradCheck {
    let shape = tiny_shape();
    let batch = 2;
    let mut net = random_net(shape.clone(), rng);
    let obs = random_obs(&shape, batch, rng);
    let gl: Vec<f64> = (0..batch * shape.actions).map(|_| rng.random_range(-1.0..1.0)).collect();
    let gv: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();

    let (logits, values) = net.forward_train(&obs).unwrap();
    let mut params: Vec<Vec<f64>> = net.params().iter().map(|p| p.data().to_vec()).collect();
    let (rl, rv) = reference_forward(&shape, &params, obs.data(), batch);
    let max_forward_err = logits
        .data()
        .iter()
        .zip(&rl)
        .chain(values.data().iter().zip(&rv))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let grads = net
        .backward(
            &obs,
            &Tensor::from_vec(&[batch, shape.actions], gl.clone()).unwrap(),
            &Tensor::from_vec(&[batch], gv.clone()).unwrap(),
        )
        .unwrap();

    let objective = |params: &[Vec<f64>]| {
        let (l, v, pattern) = reference_forward_pattern(&shape, params, obs.data(), batch);
        let f = l.iter().zip(&gl).map(|(a, b)| a * b).sum::<f64>() + v.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>();
        (f, pattern)
    };
    let (_, base_pattern) = objective(&params);
    let step = 1e-3;
    let mut max_rel_err: f64 = 0.0;
    let (mut checked, mut skipped) = (0, 0);
    for t in 0..params.len() {
        for i in 0..params[t].len() {
            let orig = params[t][i];
            params[t][i] = orig + step;
            let (up, up_pattern) = objective(&params);
            params[t][i] = orig - step;
            let (down, down_pattern) = objective(&params);
            params[t][i] = orig;
            if up_pattern != base_pattern || down_pattern != base_pattern {
                skipped += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * step);
            let analytic = grads.tensors[t].data()[i];
            let denom = analytic.abs().max(numeric.abs()).max(GRAD_FLOOR);
            max_rel_err = max_rel_err.max((analytic - numeric).abs() / denom);
            checked += 1;
        }
    }
    GradCheck { max_rel_err, max_forward_err, checked, skipped }
}

/// GAE by its definition: `A_t = sum_k (gamma lambda)^k delta_{t+k}`, where
/// the sum stops after the first transition that ends an episode.
pub fn brute_gae(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let next_value = |t: usize| if t + 1 < n { values[t + 1] } else { bootstrap };
    let delta = |t: usize| {
        let live = if dones[t] { 0.0 } else { 1.0 };
        rewards[t] + gamma * live * next_value(t) - values[t]
    };
    (0..n)
        .map(|t| {
            let mut total = 0.0;
            for k in 0..(n - t) {
                total += (gamma * lambda).powi(k as i32) * delta(t + k);
                if dones[t + k] {
                    break;
                }
            }
            total
        })
        .collect()
}

/// 4-connected components of equal RGB, by recursive flood fill. Labels are
/// assigned in raster order of each component's first pixel.
pub fn flood_fill_labels(width: usize, height: usize, pixels: &[u8]) -> Vec<u32> {
    fn fill(x: usize, y: usize, w: usize, h: usize, px: &[u8], color: &[u8], label: u32, out: &mut [u32]) {
        let i = y * w + x;
        if out[i] != 0 || &px[3 * i..3 * i + 3] != color {
            return;
        }
        out[i] = label;
        if x > 0 {
            fill(x - 1, y, w, h, px, color, label, out);
        }
        if x + 1 < w {
            fill(x + 1, y, w, h, px, color, label, out);
        }
        if y > 0 {
            fill(x, y - 1, w, h, px, color, label, out);
        }
        if y + 1 < h {
            fill(x, y + 1, w, h, px, color, label, out);
        }
    }
    let mut out = vec![0u32; width * height];
    let mut next = 1;
    for y in 0..height {
        for x in 0..width {
            if out[y * width + x] == 0 {
                let i = y * width + x;
                let color = pixels[3 * i..3 * i + 3].to_vec();
                fill(x, y, width, height, pixels, &color, next, &mut out);
                next += 1;
            }
        }
    }
    out
}

/// Whether two labelings induce the same partition of the pixels.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter().zip(b).all(|(x, y)| *ab.entry(*x).or_insert(*y) == *y && *ba.entry(*y).or_insert(*x) == *x)
}

/// Random frame with few colors and blocky structure so components are non-trivial.
pub fn random_blocky_frame<R: Rng>(rng: &mut R, max_side: usize) -> segrl::Frame {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let palette: Vec<[u8; 3]> = (0..rng.random_range(1..=4)).map(|_| rng.random()).collect();
    let mut f = segrl::Frame::filled(w, h, palette[0]);
    for _ in 0..rng.random_range(0..12) {
        let c = palette[rng.random_range(0..palette.len())];
        let (x, y) = (rng.random_range(0..w) as i64, rng.random_range(0..h) as i64);
        f.fill_rect(x, y, rng.random_range(1..6), rng.random_range(1..6), c);
    }
    for _ in 0..rng.random_range(0..6) {
        let c = palette[rng.random_range(0..palette.len())];
        f.set_pixel(rng.random_range(0..w), rng.random_range(0..h), c);
    }
    f
}
