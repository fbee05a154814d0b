//! Video and mask-track evaluation: PSNR, SSIM, spatio-temporal IoU,
//! mask IoU, boundary IoU and J&F.

mod masks;
mod report;
mod video;

use image::RgbImage;
use thiserror::Error;

use crate::mask::BinaryMask;

pub use masks::{boundary_iou, jf_score, mask_iou, JfScore};
pub use report::{aggregate, evaluate_clip_pair, AggregateReport, Convention, MaskMetrics, MetricsConfig, MetricsReport};
pub use video::{motion_mask, psnr, ssim, st_iou, PSNR_CAP_DB};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// `T` RGB frames of identical size.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    frames: Vec<RgbImage>,
    fps: f64,
}

impl VideoClip {
    pub fn new(frames: Vec<RgbImage>, fps: f64) -> Result<Self, MetricsError> {
        let Some(first) = frames.first() else {
            return Err(MetricsError::InvalidInput("a clip needs at least one frame".into()));
        };
        let dims = first.dimensions();
        if let Some(i) = frames.iter().position(|f| f.dimensions() != dims) {
            return Err(MetricsError::InvalidInput(format!(
                "frame {i} is {:?}, expected {dims:?}",
                frames[i].dimensions()
            )));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(MetricsError::InvalidInput(format!("fps must be positive, got {fps}")));
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(width, height)`.
    pub fn dimensions(&self) -> (u32, u32) {
        self.frames[0].dimensions()
    }

    pub fn into_frames(self) -> Vec<RgbImage> {
        self.frames
    }
}

/// Binary masks of identical size, one per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskTrack {
    frames: Vec<BinaryMask>,
}

impl MaskTrack {
    pub fn new(frames: Vec<BinaryMask>) -> Result<Self, MetricsError> {
        if let Some(first) = frames.first() {
            let dims = first.dimensions();
            if let Some(i) = frames.iter().position(|f| f.dimensions() != dims) {
                return Err(MetricsError::InvalidInput(format!(
                    "mask {i} is {:?}, expected {dims:?}",
                    frames[i].dimensions()
                )));
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[BinaryMask] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dimensions(&self) -> Option<(u32, u32)> {
        self.frames.first().map(BinaryMask::dimensions)
    }
}

fn check_clips(a: &VideoClip, b: &VideoClip) -> Result<(), MetricsError> {
    if a.len() != b.len() || a.dimensions() != b.dimensions() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} frames of {:?} vs {} frames of {:?}",
            a.len(),
            a.dimensions(),
            b.len(),
            b.dimensions()
        )));
    }
    Ok(())
}

fn check_tracks(a: &MaskTrack, b: &MaskTrack) -> Result<(), MetricsError> {
    if a.len() != b.len() || a.dimensions() != b.dimensions() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} masks of {:?} vs {} masks of {:?}",
            a.len(),
            a.dimensions(),
            b.len(),
            b.dimensions()
        )));
    }
    Ok(())
}

/// Compensated sum over values sorted first, so the result does not depend
/// on input order.
pub(crate) fn stable_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in sorted {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

pub(crate) fn stable_mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| stable_sum(values) / values.len() as f64)
}
