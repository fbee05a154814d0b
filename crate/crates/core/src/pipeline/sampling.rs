use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;

/// A training window `[start_frame, start_frame + length)` of one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipWindow {
    pub schema_version: u32,
    pub clip_id: String,
    pub start_frame: usize,
    pub length: usize,
    pub fps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub count: usize,
    pub length: usize,
    /// Openness change between consecutive frames that counts as an event.
    pub openness_delta: f64,
    /// Probability that a window is placed around an event.
    pub p_event: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self { count: 16, length: 25, openness_delta: 0.05, p_event: 0.5 }
    }
}

/// Frames `i` where `|openness[i] - openness[i-1]| > delta`.
pub fn gripper_events(openness: &[f64], delta: f64) -> Vec<usize> {
    (1..openness.len()).filter(|&i| (openness[i] - openness[i - 1]).abs() > delta).collect()
}

/// Draw `count` windows. With probability `p_event` (when the log has events)
/// a window's center falls uniformly within half a window of a random event,
/// so the window always covers it; otherwise the start is uniform over all
/// valid starts. Windows near the ends are shifted inside the clip.
pub fn sample_clips(
    openness: &[f64],
    clip_id: &str,
    fps: f64,
    params: &SamplingParams,
    seed: u64,
) -> Result<Vec<ClipWindow>, PipelineError> {
    let len = params.length;
    if len == 0 || openness.len() < len {
        return Err(PipelineError::InvalidInput(format!(
            "log of {} frames cannot hold a {len}-frame window",
            openness.len()
        )));
    }
    if !(0.0..=1.0).contains(&params.p_event) || !(params.openness_delta >= 0.0) || !params.openness_delta.is_finite() {
        return Err(PipelineError::InvalidInput(format!(
            "need p_event in [0, 1] and openness_delta >= 0, got {} and {}",
            params.p_event, params.openness_delta
        )));
    }
    if openness.iter().any(|v| !v.is_finite()) {
        return Err(PipelineError::InvalidInput("openness values must be finite".into()));
    }
    let events = gripper_events(openness, params.openness_delta);
    let last_start = openness.len() - len;
    let to_u32 = |n: usize| u32::try_from(n).map_err(|_| PipelineError::InvalidInput("clip too long".into()));
    let (last_u32, len_u32, events_u32) = (to_u32(last_start)?, to_u32(len)?, to_u32(events.len())?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(params.count);
    for _ in 0..params.count {
        let around_event = !events.is_empty() && rng.random::<f64>() < params.p_event;
        let start = if around_event {
            let k = events[rng.random_range(0..events_u32) as usize];
            let u = rng.random_range(0..len_u32) as usize;
            (k + u).saturating_sub(len - 1).min(last_start)
        } else {
            rng.random_range(0..=last_u32) as usize
        };
        out.push(ClipWindow { schema_version: crate::SCHEMA_VERSION, clip_id: clip_id.to_string(), start_frame: start, length: len, fps });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_log(n: usize, k: usize) -> Vec<f64> {
        (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn events_found() {
        assert_eq!(gripper_events(&step_log(10, 4), 0.05), vec![4]);
        assert!(gripper_events(&[0.5; 10], 0.05).is_empty());
    }

    #[test]
    fn always_covers_the_event_when_forced() {
        for k in [1, 3, 50, 98, 99] {
            let p = SamplingParams { count: 500, p_event: 1.0, ..Default::default() };
            for w in sample_clips(&step_log(100, k), "c", 30.0, &p, 7).unwrap() {
                assert!(w.start_frame <= k && k < w.start_frame + w.length, "k={k} start={}", w.start_frame);
                assert!(w.start_frame + w.length <= 100);
            }
        }
    }

    #[test]
    fn no_events_is_uniform() {
        let p = SamplingParams { count: 20000, length: 10, p_event: 1.0, ..Default::default() };
        let ws = sample_clips(&[0.3; 19], "c", 30.0, &p, 1).unwrap();
        let mut hist = [0usize; 10];
        ws.iter().for_each(|w| hist[w.start_frame] += 1);
        for h in hist {
            assert!((h as f64 / 2000.0 - 1.0).abs() < 0.1, "{hist:?}");
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let p = SamplingParams::default();
        let log = step_log(60, 30);
        assert_eq!(sample_clips(&log, "c", 30.0, &p, 3).unwrap(), sample_clips(&log, "c", 30.0, &p, 3).unwrap());
        assert!(sample_clips(&log[..10], "c", 30.0, &p, 3).is_err());
        assert!(sample_clips(&log, "c", 30.0, &SamplingParams { p_event: 1.5, ..p }, 3).is_err());
    }
}
