//! Classical stand-in for a foundation segmentation model.
//!
//! A frame is color-quantized, split into 4-connected regions of identical
//! quantized color, small regions are dropped to background, and the result is
//! recolored from a fixed palette (optionally alpha-blended over the input).

mod palette;
mod unionfind;

pub use palette::{palette_color, palette_index, PALETTE};
pub use unionfind::UnionFind;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::Frame;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("quantization bits must be in 1..=8, got {0}")]
    InvalidBits(u32),
    #[error("minimum segment area must be >= 1, got {0}")]
    InvalidMinArea(u32),
    #[error("overlay alpha must be in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("label map is {map_w}x{map_h} but frame is {frame_w}x{frame_h}")]
    DimensionMismatch { map_w: usize, map_h: usize, frame_w: usize, frame_h: usize },
    #[error("invalid label map: {0}")]
    InvalidLabels(String),
}

/// How segments are drawn back into the frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RenderMode {
    /// Segment pixels take their palette color.
    Replace,
    /// `round(alpha * palette + (1 - alpha) * original)` per channel.
    Overlay(f64),
}

impl RenderMode {
    pub fn validate(self) -> Result<(), SegmentError> {
        match self {
            RenderMode::Overlay(a) if !(0.0..=1.0).contains(&a) => Err(SegmentError::InvalidAlpha(a)),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    pub bits: u32,
    pub min_area: u32,
    pub mode: RenderMode,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig { bits: 3, min_area: 4, mode: RenderMode::Replace }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), SegmentError> {
        if !(1..=8).contains(&self.bits) {
            return Err(SegmentError::InvalidBits(self.bits));
        }
        if self.min_area < 1 {
            return Err(SegmentError::InvalidMinArea(self.min_area));
        }
        self.mode.validate()
    }
}

/// Per-pixel segment ids; 0 is background. Nonzero labels are dense in `1..=count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentLabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl SegmentLabelMap {
    /// Validates length and density of `labels`.
    pub fn new(width: usize, height: usize, labels: Vec<u32>, count: u32) -> Result<Self, SegmentError> {
        if labels.len() != width * height {
            return Err(SegmentError::InvalidLabels(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        let mut seen = vec![false; count as usize + 1];
        for &l in &labels {
            if l > count {
                return Err(SegmentError::InvalidLabels(format!("label {l} exceeds segment count {count}")));
            }
            seen[l as usize] = true;
        }
        if let Some(missing) = (1..=count as usize).find(|&l| !seen[l]) {
            return Err(SegmentError::InvalidLabels(format!("label {missing} unused; labels must be dense")));
        }
        Ok(SegmentLabelMap { width, height, labels, count })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn segment_count(&self) -> u32 {
        self.count
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel count per label, index 0 being background.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.count as usize + 1];
        for &l in &self.labels {
            areas[l as usize] += 1;
        }
        areas
    }
}

fn bucket_midpoint(v: u8, bits: u32) -> u8 {
    let width = 1u16 << (8 - bits);
    let low = (v as u16) & !(width - 1);
    (low + (width - 1) / 2) as u8
}

/// Maps every channel to the midpoint of its `2^bits` uniform bucket.
pub fn quantize(frame: &Frame, bits: u32) -> Result<Frame, SegmentError> {
    if !(1..=8).contains(&bits) {
        return Err(SegmentError::InvalidBits(bits));
    }
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = bucket_midpoint(v as u8, bits);
    }
    let mut out = frame.clone();
    out.pixels_mut().iter_mut().for_each(|p| *p = lut[*p as usize]);
    Ok(out)
}

/// 4-connected components of identical color, labeled 1.. in row-major
/// order of first appearance.
pub fn label_components(frame: &Frame) -> SegmentLabelMap {
    let (w, h) = (frame.width(), frame.height());
    let px = frame.pixels();
    let color = |i: usize| [px[3 * i], px[3 * i + 1], px[3 * i + 2]];
    let mut uf = UnionFind::new(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let c = color(i);
            if x > 0 && color(i - 1) == c {
                uf.union(i as u32, (i - 1) as u32);
            }
            if y > 0 && color(i - w) == c {
                uf.union(i as u32, (i - w) as u32);
            }
        }
    }
    let mut root_label = vec![0u32; w * h];
    let mut labels = Vec::with_capacity(w * h);
    let mut count = 0;
    for i in 0..w * h {
        let r = uf.find(i as u32) as usize;
        if root_label[r] == 0 {
            count += 1;
            root_label[r] = count;
        }
        labels.push(root_label[r]);
    }
    SegmentLabelMap { width: w, height: h, labels, count }
}

/// Relabels segments smaller than `min_area` as background and re-densifies
/// the remaining labels, keeping their order.
pub fn suppress_small(map: &SegmentLabelMap, min_area: u32) -> SegmentLabelMap {
    let areas = map.areas();
    let mut remap = vec![0u32; areas.len()];
    let mut next = 0;
    for (label, &area) in areas.iter().enumerate().skip(1) {
        if area >= min_area as usize {
            next += 1;
            remap[label] = next;
        }
    }
    SegmentLabelMap {
        width: map.width,
        height: map.height,
        labels: map.labels.iter().map(|&l| remap[l as usize]).collect(),
        count: next,
    }
}

/// Draws the segments over `original`; background pixels are left untouched.
pub fn render(map: &SegmentLabelMap, original: &Frame, mode: RenderMode) -> Result<Frame, SegmentError> {
    if map.width != original.width() || map.height != original.height() {
        return Err(SegmentError::DimensionMismatch {
            map_w: map.width,
            map_h: map.height,
            frame_w: original.width(),
            frame_h: original.height(),
        });
    }
    mode.validate()?;
    let colors: Vec<[u8; 3]> = (0..=map.count).map(palette_color).collect();
    let mut out = original.clone();
    let px = out.pixels_mut();
    for (i, &label) in map.labels.iter().enumerate() {
        if label == 0 {
            continue;
        }
        let pal = colors[label as usize];
        let dst = &mut px[3 * i..3 * i + 3];
        match mode {
            RenderMode::Replace => dst.copy_from_slice(&pal),
            RenderMode::Overlay(alpha) => {
                for (d, p) in dst.iter_mut().zip(pal) {
                    *d = (alpha * p as f64 + (1.0 - alpha) * *d as f64).round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    Ok(out)
}

/// Quantized label map with small segments suppressed: the part of the
/// pipeline a remote segmentation model replaces.
pub fn segment_labels(frame: &Frame, config: &SegmenterConfig) -> Result<SegmentLabelMap, SegmentError> {
    config.validate()?;
    let quantized = quantize(frame, config.bits)?;
    Ok(suppress_small(&label_components(&quantized), config.min_area))
}

/// quantize, label, suppress, render.
pub fn segment_frame(frame: &Frame, config: &SegmenterConfig) -> Result<Frame, SegmentError> {
    let map = segment_labels(frame, config)?;
    render(&map, frame, config.mode)
}
