use std::collections::VecDeque;
use std::sync::OnceLock;

use super::PipelineError;
use crate::env::{Env, EnvError, StepResult};
use crate::frame::{Frame, ATARI_HEIGHT, ATARI_WIDTH};
use crate::nn::Tensor;

/// Side length of the downscaled observation.
pub const OBS_SIZE: usize = 84;

/// Single-channel byte image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

/// Repeats `action` for up to `k` native frames.
///
/// Rewards are summed, done flags OR-ed, and the returned frame is the
/// pixelwise maximum of the last two native frames. Stops early when the
/// episode ends.
pub fn frame_skip_step(env: &mut dyn Env, action: usize, k: u32) -> Result<StepResult, EnvError> {
    assert!(k >= 1, "frameskip must be >= 1");
    let mut reward = 0.0;
    let mut previous: Option<Frame> = None;
    let mut last = env.step(action)?;
    reward += last.reward;
    for _ in 1..k {
        if last.done() {
            break;
        }
        let next = env.step(action)?;
        reward += next.reward;
        previous = Some(std::mem::replace(&mut last, next).frame);
    }
    let frame = match previous {
        Some(prev) => {
            let mut f = last.frame;
            for (a, b) in f.pixels_mut().iter_mut().zip(prev.pixels()) {
                *a = (*a).max(*b);
            }
            f
        }
        None => last.frame,
    };
    Ok(StepResult {
        frame,
        reward,
        terminated: last.terminated,
        truncated: last.truncated,
    })
}

/// `round(0.299 R + 0.587 G + 0.114 B)`, ties rounded up, in exact integer arithmetic.
pub fn grayscale(frame: &Frame) -> GrayImage {
    let data = frame
        .pixels()
        .chunks_exact(3)
        .map(|p| ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000).min(255) as u8)
        .collect();
    GrayImage { width: frame.width(), height: frame.height(), data }
}

/// For each output index, the overlapping source indices and overlap lengths
/// in units where a source pixel spans `dst` and an output pixel spans `src`.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, u64)>> {
    (0..dst)
        .map(|i| {
            let (lo, hi) = (i * src, (i + 1) * src);
            (lo / dst..=(hi - 1) / dst)
                .filter_map(|r| {
                    let overlap = hi.min((r + 1) * dst).saturating_sub(lo.max(r * dst));
                    (overlap > 0).then_some((r, overlap as u64))
                })
                .collect()
        })
        .collect()
}

type Weights = (Vec<Vec<(usize, u64)>>, Vec<Vec<(usize, u64)>>);

fn atari_weights() -> &'static Weights {
    static WEIGHTS: OnceLock<Weights> = OnceLock::new();
    WEIGHTS.get_or_init(|| (area_weights(ATARI_HEIGHT, OBS_SIZE), area_weights(ATARI_WIDTH, OBS_SIZE)))
}

/// Area-averaging resample from 210x160 to 84x84, rounded half up.
pub fn downscale(gray: &GrayImage) -> Result<GrayImage, PipelineError> {
    if gray.width != ATARI_WIDTH || gray.height != ATARI_HEIGHT {
        return Err(PipelineError::ImageShape {
            width: gray.width,
            height: gray.height,
            expected_w: ATARI_WIDTH,
            expected_h: ATARI_HEIGHT,
        });
    }
    let (rows, cols) = atari_weights();
    let denom = (ATARI_HEIGHT * ATARI_WIDTH) as u64;
    let mut data = Vec::with_capacity(OBS_SIZE * OBS_SIZE);
    for row_w in rows {
        for col_w in cols {
            let mut acc = 0u64;
            for &(r, wr) in row_w {
                let line = &gray.data[r * ATARI_WIDTH..(r + 1) * ATARI_WIDTH];
                let inner: u64 = col_w.iter().map(|&(c, wc)| wc * line[c] as u64).sum();
                acc += wr * inner;
            }
            data.push(((2 * acc + denom) / (2 * denom)) as u8);
        }
    }
    Ok(GrayImage { width: OBS_SIZE, height: OBS_SIZE, data })
}

/// Sign of the reward.
pub fn clip_reward(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Stacked observation, oldest slice first, values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObsTensor {
    depth: usize,
    data: Vec<f32>,
}

impl ObsTensor {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn slice(&self, i: usize) -> &[f32] {
        let n = OBS_SIZE * OBS_SIZE;
        &self.data[i * n..(i + 1) * n]
    }

    /// `[1, depth, 84, 84]` network input.
    pub fn to_batch(&self) -> Tensor<f32> {
        Tensor::from_vec(&[1, self.depth, OBS_SIZE, OBS_SIZE], self.data.clone()).expect("sized by construction")
    }
}

/// FIFO of the last `depth` downscaled frames.
#[derive(Clone, Debug)]
pub struct FrameStack {
    depth: usize,
    frames: VecDeque<GrayImage>,
}

impl FrameStack {
    pub fn new(depth: usize) -> Self {
        FrameStack { depth, frames: VecDeque::with_capacity(depth) }
    }

    /// Fills every slot with `first`.
    pub fn reset(&mut self, first: GrayImage) -> ObsTensor {
        self.frames.clear();
        for _ in 0..self.depth {
            self.frames.push_back(first.clone());
        }
        self.observation()
    }

    pub fn push(&mut self, frame: GrayImage) -> ObsTensor {
        if self.frames.is_empty() {
            return self.reset(frame);
        }
        if self.frames.len() == self.depth {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        self.observation()
    }

    fn observation(&self) -> ObsTensor {
        let data = self
            .frames
            .iter()
            .flat_map(|f| f.data.iter().map(|&v| v as f32 / 255.0))
            .collect();
        ObsTensor { depth: self.depth, data }
    }
}
