//! Robot episode correction: score rendered-vs-observed match discrepancy,
//! filter bad episodes, and rectify per-frame 2D skeletons with homographies
//! estimated from the matches.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{apply_homography, estimate_homography_ransac, Correspondence, GeomError, Homography, RansacParams};
use crate::joints::JointSet2D;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RectifyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("episode has no frame with correspondences")]
    Unscorable,
}

/// Matched points for one frame: `src` in the rendering, `dst` in the observed video.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameCorrespondences {
    pub frame_index: usize,
    pub pairs: Vec<Correspondence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDiscrepancy {
    pub frame_index: usize,
    pub median_residual: f64,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeScore {
    pub per_frame: Vec<FrameDiscrepancy>,
    pub episode_median: f64,
    pub frames_evaluated: usize,
    /// Frames excluded for having no pairs.
    pub frames_skipped: usize,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn check_pairs(frame: &FrameCorrespondences) -> Result<(), RectifyError> {
    match frame.pairs.iter().position(|c| !c.is_valid()) {
        Some(i) => Err(RectifyError::InvalidInput(format!(
            "frame {}: pair {i} is not finite or has negative weight",
            frame.frame_index
        ))),
        None => Ok(()),
    }
}

/// Per-frame median of `|dst - src|`, and the median of those medians.
pub fn score_episode(frames: &[FrameCorrespondences]) -> Result<EpisodeScore, RectifyError> {
    let mut per_frame = Vec::new();
    let mut skipped = 0;
    for f in frames {
        check_pairs(f)?;
        if f.pairs.is_empty() {
            skipped += 1;
            continue;
        }
        let mut residuals: Vec<f64> = f.pairs.iter().map(Correspondence::residual).collect();
        per_frame.push(FrameDiscrepancy {
            frame_index: f.frame_index,
            median_residual: median(&mut residuals),
            pair_count: f.pairs.len(),
        });
    }
    if per_frame.is_empty() {
        return Err(RectifyError::Unscorable);
    }
    let mut medians: Vec<f64> = per_frame.iter().map(|d| d.median_residual).collect();
    Ok(EpisodeScore {
        episode_median: median(&mut medians),
        frames_evaluated: per_frame.len(),
        frames_skipped: skipped,
        per_frame,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    /// Pixels; frame and episode medians above this count as discrepant.
    pub median_threshold: f64,
    /// Largest tolerated fraction of discrepant frames.
    pub max_bad_fraction: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { median_threshold: 8.0, max_bad_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    EpisodeMedian,
    BadFrameFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeDecision {
    pub keep: bool,
    pub reason: Option<DiscardReason>,
    pub bad_fraction: f64,
}

pub fn filter_episode(score: &EpisodeScore, params: &FilterParams) -> EpisodeDecision {
    let bad = score.per_frame.iter().filter(|d| d.median_residual > params.median_threshold).count();
    let bad_fraction = bad as f64 / score.frames_evaluated.max(1) as f64;
    let reason = if score.episode_median > params.median_threshold {
        Some(DiscardReason::EpisodeMedian)
    } else if bad_fraction > params.max_bad_fraction {
        Some(DiscardReason::BadFrameFraction)
    } else {
        None
    };
    EpisodeDecision { keep: reason.is_none(), reason, bad_fraction }
}

/// Discard an episode when its median discrepancy exceeds the threshold or
/// too large a fraction of its frames do.
pub fn filter_episodes(scores: &[EpisodeScore], params: &FilterParams) -> Result<Vec<EpisodeDecision>, RectifyError> {
    if !(params.median_threshold > 0.0) || !(params.max_bad_fraction > 0.0 && params.max_bad_fraction <= 1.0) {
        return Err(RectifyError::InvalidInput(format!(
            "thresholds must satisfy median > 0 and 0 < fraction <= 1, got {} and {}",
            params.median_threshold, params.max_bad_fraction
        )));
    }
    Ok(scores.iter().map(|s| filter_episode(s, params)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RectifyParams {
    pub ransac: RansacParams,
    pub min_pairs: usize,
}

impl Default for RectifyParams {
    fn default() -> Self {
        Self { ransac: RansacParams::default(), min_pairs: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    Estimated,
    /// Too few pairs; homography reused from the nearest previous frame.
    CarriedOver,
    /// RANSAC found no consensus; homography carried over.
    NoConsensus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectifiedFrame {
    pub frame_index: usize,
    pub homography: Homography,
    pub status: FrameStatus,
    pub inlier_ratio: Option<f64>,
    pub joints: JointSet2D,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RectifyResult {
    pub frames: Vec<RectifiedFrame>,
}

/// Seed for one frame's RANSAC, so frames can be estimated independently.
fn frame_seed(seed: u64, frame: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(frame as u64)
}

/// Rectify `joints[i]` (frame `i`) with a homography estimated from that
/// frame's correspondences; frames with fewer than `min_pairs` pairs or no
/// consensus reuse the previous frame's homography (identity at the start).
pub fn rectify_episode(
    joints: &[JointSet2D],
    correspondences: &[FrameCorrespondences],
    params: &RectifyParams,
) -> Result<RectifyResult, RectifyError> {
    let mut by_frame: BTreeMap<usize, &FrameCorrespondences> = BTreeMap::new();
    for c in correspondences {
        check_pairs(c)?;
        if c.frame_index >= joints.len() {
            return Err(RectifyError::InvalidInput(format!(
                "correspondences for frame {} but the joint sequence has {} frames",
                c.frame_index,
                joints.len()
            )));
        }
        if by_frame.insert(c.frame_index, c).is_some() {
            return Err(RectifyError::InvalidInput(format!("duplicate correspondences for frame {}", c.frame_index)));
        }
    }
    let min_pairs = params.min_pairs.max(4);
    let estimates: Vec<Option<Result<(Homography, f64), GeomError>>> = (0..joints.len())
        .into_par_iter()
        .map(|i| {
            let pairs = by_frame.get(&i).map(|c| c.pairs.as_slice()).unwrap_or(&[]);
            if pairs.len() < min_pairs {
                return None;
            }
            let ransac = RansacParams { seed: frame_seed(params.ransac.seed, i), ..params.ransac };
            Some(estimate_homography_ransac(pairs, &ransac).map(|r| (r.homography, r.inlier_ratio())))
        })
        .collect();

    let mut current = Homography::identity();
    let mut frames = Vec::with_capacity(joints.len());
    for (i, (j, est)) in joints.iter().zip(estimates).enumerate() {
        let (status, inlier_ratio) = match est {
            Some(Ok((h, ratio))) => {
                current = h;
                (FrameStatus::Estimated, Some(ratio))
            }
            Some(Err(GeomError::InvalidInput(msg))) => {
                return Err(RectifyError::InvalidInput(format!("frame {i}: {msg}")));
            }
            Some(Err(_)) => (FrameStatus::NoConsensus, None),
            None => (FrameStatus::CarriedOver, None),
        };
        let joints = if current.is_identity() { j.clone() } else { apply_homography(&current, j) };
        frames.push(RectifiedFrame { frame_index: i, homography: current, status, inlier_ratio, joints });
    }
    Ok(RectifyResult { frames })
}
