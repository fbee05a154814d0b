use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_tracks, stable_sum, MaskTrack, MetricsError};
use crate::mask::BinaryMask;

/// Per-frame values over frames where either mask is nonempty.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct FrameValues(pub Vec<f64>);

impl FrameValues {
    /// Mean, or 1.0 when every frame was skipped.
    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            1.0
        } else {
            stable_sum(&self.0) / self.0.len() as f64
        }
    }

    pub fn all_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let u = a.union_count(b);
    if u == 0 {
        1.0
    } else {
        a.intersection_count(b) as f64 / u as f64
    }
}

fn per_frame(a: &MaskTrack, b: &MaskTrack, f: impl Fn(&BinaryMask, &BinaryMask) -> f64 + Sync) -> FrameValues {
    FrameValues(
        a.frames()
            .par_iter()
            .zip(b.frames())
            .filter(|(x, y)| !(x.is_empty() && y.is_empty()))
            .map(|(x, y)| f(x, y))
            .collect(),
    )
}

pub(crate) fn mask_iou_frames(a: &MaskTrack, b: &MaskTrack) -> Result<FrameValues, MetricsError> {
    check_tracks(a, b)?;
    Ok(per_frame(a, b, iou))
}

/// Per-frame IoU averaged over frames where either mask is nonempty; 1.0 if none is.
pub fn mask_iou(a: &MaskTrack, b: &MaskTrack) -> Result<f64, MetricsError> {
    Ok(mask_iou_frames(a, b)?.mean())
}

pub(crate) fn boundary_iou_frames(a: &MaskTrack, b: &MaskTrack, d: f64) -> Result<FrameValues, MetricsError> {
    check_tracks(a, b)?;
    if !(d >= 1.0) {
        return Err(MetricsError::InvalidInput(format!("boundary width must be >= 1, got {d}")));
    }
    Ok(per_frame(a, b, |x, y| iou(&x.boundary_band(d), &y.boundary_band(d))))
}

/// IoU of the bands of width `d` inside each mask's boundary, averaged like [`mask_iou`].
pub fn boundary_iou(a: &MaskTrack, b: &MaskTrack, d: f64) -> Result<f64, MetricsError> {
    Ok(boundary_iou_frames(a, b, d)?.mean())
}

/// Boundary F-measure for one frame: boundary pixels of each mask count as
/// matched when within `tolerance` px of the other's boundary.
pub(crate) fn boundary_f(a: &BinaryMask, b: &BinaryMask, tolerance: f64) -> f64 {
    let (ba, bb) = (a.boundary_band(1.0), b.boundary_band(1.0));
    let (na, nb) = (ba.count(), bb.count());
    if na == 0 || nb == 0 {
        return if na == nb { 1.0 } else { 0.0 };
    }
    let (w, h) = a.dimensions();
    let t2 = tolerance * tolerance;
    let to_b = BinaryMask::squared_distance_to(w, h, false, |x, y| bb.get(x, y));
    let to_a = BinaryMask::squared_distance_to(w, h, false, |x, y| ba.get(x, y));
    let matched = |band: &BinaryMask, dist: &[f64]| band.as_slice().iter().zip(dist).filter(|(&m, &d)| m && d <= t2).count();
    let precision = matched(&ba, &to_b) as f64 / na as f64;
    let recall = matched(&bb, &to_a) as f64 / nb as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JfScore {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

pub(crate) fn boundary_f_frames(a: &MaskTrack, b: &MaskTrack, tolerance: f64) -> Result<FrameValues, MetricsError> {
    check_tracks(a, b)?;
    if !(tolerance >= 0.0) {
        return Err(MetricsError::InvalidInput(format!("boundary tolerance must be >= 0, got {tolerance}")));
    }
    Ok(per_frame(a, b, |x, y| boundary_f(x, y, tolerance)))
}

/// Region similarity J, boundary accuracy F (boundary pixels matched within
/// `tolerance` px) and their mean.
pub fn jf_score(a: &MaskTrack, b: &MaskTrack, tolerance: f64) -> Result<JfScore, MetricsError> {
    let j = mask_iou(a, b)?;
    let f = boundary_f_frames(a, b, tolerance)?.mean();
    Ok(JfScore { j, f, jf: (j + f) / 2.0 })
}
