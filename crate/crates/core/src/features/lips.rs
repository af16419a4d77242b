//! Lip openness and brightness from grayscale video frames.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dark-aperture threshold as a fraction of the ROI mean luminance.
pub const OPENNESS_THRESHOLD: f64 = 0.35;

/// Grayscale frame with luminance in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{} pixels for a {width}×{height} frame",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipFeatures {
    pub avg_lip_open: f64,
    pub avg_lip_bright: f64,
}

/// (openness, brightness) of one frame.
fn frame_features(frame: &GrayFrame, roi: &Roi) -> (f64, f64) {
    let mut sum = 0.0;
    for y in roi.y..roi.y + roi.height {
        for x in roi.x..roi.x + roi.width {
            sum += frame.at(x, y);
        }
    }
    let brightness = sum / (roi.width * roi.height) as f64;
    let threshold = OPENNESS_THRESHOLD * brightness;
    let mut runs = 0usize;
    for x in roi.x..roi.x + roi.width {
        let (mut best, mut cur) = (0usize, 0usize);
        for y in roi.y..roi.y + roi.height {
            if frame.at(x, y) <= threshold {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        runs += best;
    }
    let openness = runs as f64 / (roi.width * roi.height) as f64;
    (openness, brightness)
}

/// Mean over frames of ROI brightness and of lip openness: per column the
/// longest vertical run of pixels at or below 0.35 × ROI mean, averaged
/// over columns and divided by the ROI height.
pub fn lip_features(frames: &[GrayFrame], roi: &Roi) -> Result<LipFeatures> {
    if frames.is_empty() {
        return Err(Error::invalid("no frames"));
    }
    if roi.width == 0 || roi.height == 0 {
        return Err(Error::invalid("empty region of interest"));
    }
    let (w, h) = (frames[0].width, frames[0].height);
    if frames.iter().any(|f| f.width != w || f.height != h) {
        return Err(Error::invalid("frames differ in size"));
    }
    if roi.x + roi.width > w || roi.y + roi.height > h {
        return Err(Error::invalid(format!("region {roi:?} exceeds the {w}×{h} frame")));
    }
    let (open, bright) = frames
        .iter()
        .map(|f| frame_features(f, roi))
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = frames.len() as f64;
    Ok(LipFeatures {
        avg_lip_open: open / n,
        avg_lip_bright: bright / n,
    })
}
