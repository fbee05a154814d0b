use serde::{Deserialize, Serialize};

use super::masks::{boundary_f_frames, boundary_iou_frames, mask_iou_frames};
use super::video::st_iou_counts;
use super::{psnr, ssim, stable_mean, stable_sum, MaskTrack, MetricsError, VideoClip, PSNR_CAP_DB};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    /// Gray levels.
    pub tau_motion: f64,
    /// Pixels.
    pub blur_sigma: f64,
    /// Boundary IoU band width in px; `None` uses 2% of the frame diagonal.
    pub boundary_width: Option<f64>,
    /// Match distance for the boundary F-measure, px.
    pub boundary_tolerance: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { tau_motion: 12.0, blur_sigma: 1.0, boundary_width: None, boundary_tolerance: 2.0 }
    }
}

impl MetricsConfig {
    pub fn boundary_width_for(&self, (w, h): (u32, u32)) -> f64 {
        self.boundary_width.unwrap_or_else(|| (0.02 * f64::from(w).hypot(f64::from(h))).max(1.0))
    }
}

/// A fallback value that was reported instead of a measured one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Zero error; PSNR reported at the cap.
    PsnrCap,
    /// Neither clip has motion; ST-IoU reported as 1.0.
    StIouNoMotion,
    /// Every mask frame is empty in both tracks; mask metrics reported as 1.0.
    MasksAllEmpty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskMetrics {
    pub mask_iou: f64,
    pub boundary_iou: f64,
    pub boundary_width: f64,
    pub j: f64,
    pub f: f64,
    pub jf: f64,
    /// Frames where either mask is nonempty.
    pub frames_scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub psnr: f64,
    pub ssim: f64,
    pub st_iou: f64,
    /// Absent when no mask tracks were supplied.
    pub masks: Option<MaskMetrics>,
    /// Reserved for scores computed by external tools.
    pub lpips: Option<f64>,
    pub fvd: Option<f64>,
    pub conventions: Vec<Convention>,
}

/// Every applicable metric for one generated/ground-truth pair. Mask tracks
/// are `(generated, ground truth)`.
pub fn evaluate_clip_pair(
    gen: &VideoClip,
    gt: &VideoClip,
    masks: Option<(&MaskTrack, &MaskTrack)>,
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricsError> {
    let mut conventions = Vec::new();
    let p = psnr(gen, gt)?;
    if p == PSNR_CAP_DB {
        conventions.push(Convention::PsnrCap);
    }
    let s = ssim(gen, gt)?;
    let st = st_iou_counts(gen, gt, config.tau_motion, config.blur_sigma)?;
    if st.union == 0 {
        conventions.push(Convention::StIouNoMotion);
    }
    let masks = match masks {
        None => None,
        Some((a, b)) => {
            if a.len() != gen.len() || a.dimensions() != Some(gen.dimensions()) {
                return Err(MetricsError::ShapeMismatch(format!(
                    "mask track has {} frames of {:?}, clip has {} of {:?}",
                    a.len(),
                    a.dimensions(),
                    gen.len(),
                    gen.dimensions()
                )));
            }
            let d = config.boundary_width_for(gen.dimensions());
            let j = mask_iou_frames(a, b)?;
            let bi = boundary_iou_frames(a, b, d)?;
            let f = boundary_f_frames(a, b, config.boundary_tolerance)?;
            if j.all_empty() {
                conventions.push(Convention::MasksAllEmpty);
            }
            let (jm, fm) = (j.mean(), f.mean());
            Some(MaskMetrics {
                mask_iou: jm,
                boundary_iou: bi.mean(),
                boundary_width: d,
                j: jm,
                f: fm,
                jf: (jm + fm) / 2.0,
                frames_scored: j.0.len(),
            })
        }
    };
    Ok(MetricsReport { psnr: p, ssim: s, st_iou: st.value(), masks, lpips: None, fvd: None, conventions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub clips: usize,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub st_iou: Option<f64>,
    /// Clips that carried mask tracks.
    pub mask_clips: usize,
    pub mask_iou: Option<f64>,
    pub boundary_iou: Option<f64>,
    /// Per-clip J&F, macro-averaged.
    pub jf: Option<f64>,
    /// J&F with J and F pooled over every scored frame of every clip.
    pub jf_pooled: Option<f64>,
    pub lpips: Option<f64>,
    pub fvd: Option<f64>,
}

/// Macro-average over clips; independent of report order.
pub fn aggregate(reports: &[MetricsReport]) -> AggregateReport {
    let collect = |f: &dyn Fn(&MetricsReport) -> Option<f64>| reports.iter().filter_map(f).collect::<Vec<f64>>();
    let masks: Vec<&MaskMetrics> = reports.iter().filter_map(|r| r.masks.as_ref()).collect();
    let scored: Vec<&&MaskMetrics> = masks.iter().filter(|m| m.frames_scored > 0).collect();
    let frames = scored.iter().map(|m| m.frames_scored).sum::<usize>() as f64;
    let jf_pooled = if masks.is_empty() {
        None
    } else if scored.is_empty() {
        Some(1.0)
    } else {
        let j = stable_sum(&scored.iter().map(|m| m.j * m.frames_scored as f64).collect::<Vec<_>>()) / frames;
        let f = stable_sum(&scored.iter().map(|m| m.f * m.frames_scored as f64).collect::<Vec<_>>()) / frames;
        Some((j + f) / 2.0)
    };
    AggregateReport {
        clips: reports.len(),
        psnr: stable_mean(&collect(&|r| Some(r.psnr))),
        ssim: stable_mean(&collect(&|r| Some(r.ssim))),
        st_iou: stable_mean(&collect(&|r| Some(r.st_iou))),
        mask_clips: masks.len(),
        mask_iou: stable_mean(&collect(&|r| r.masks.as_ref().map(|m| m.mask_iou))),
        boundary_iou: stable_mean(&collect(&|r| r.masks.as_ref().map(|m| m.boundary_iou))),
        jf: stable_mean(&collect(&|r| r.masks.as_ref().map(|m| m.jf))),
        jf_pooled,
        lpips: stable_mean(&collect(&|r| r.lpips)),
        fvd: stable_mean(&collect(&|r| r.fvd)),
    }
}
