use serde::{Deserialize, Serialize};

use super::{
    build_tracklets, fill_gaps, handedness_filter, merge_tracklets, number_of_hands_filter, BBox,
    DetectionStream, Handedness, MergeParams, OneEuroFilter, OneEuroParams, TrackError,
    TrackerParams, Tracklet,
};
use crate::joints::JointSet2D;
use crate::skeleton::HAND_JOINTS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoiConfig {
    pub tracker: TrackerParams,
    pub handedness_min_share: f64,
    pub merge: MergeParams,
    pub max_per_hand: usize,
    pub max_fill_gap: usize,
    pub one_euro: OneEuroParams,
}

impl Default for HoiConfig {
    fn default() -> Self {
        Self {
            tracker: TrackerParams::default(),
            handedness_min_share: 0.6,
            merge: MergeParams::default(),
            max_per_hand: 1,
            max_fill_gap: 12,
            one_euro: OneEuroParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HoiOutput {
    /// Smoothed tracklets, at most `max_per_hand` per handedness, sorted by id.
    pub tracklets: Vec<Tracklet>,
}

impl HoiOutput {
    pub fn hand(&self, hand: Handedness) -> Option<&Tracklet> {
        self.tracklets.iter().find(|t| t.handedness == hand)
    }

    /// Per-frame joints of one hand over `0..frame_count`; frames without an
    /// entry (or without joints) are fully invisible.
    pub fn joint_sequence(&self, hand: Handedness, frame_count: usize) -> Vec<JointSet2D> {
        let mut out = vec![JointSet2D::invisible(HAND_JOINTS); frame_count];
        if let Some(t) = self.hand(hand) {
            for e in &t.entries {
                if let (Some(slot), Some(j)) = (out.get_mut(e.frame_index), &e.joints2d) {
                    *slot = JointSet2D::all_visible(j.iter().copied());
                }
            }
        }
        out
    }
}

/// Runs of entry indices `[start, end)` where `pred(prev, next)` holds between neighbours.
fn runs(t: &Tracklet, pred: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=t.entries.len() {
        if i == t.entries.len() || !pred(i - 1, i) {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// OneEuro over boxes and joints, restarting the filter at every frame break.
pub fn smooth_tracklet(t: &Tracklet, params: &OneEuroParams) -> Result<Tracklet, TrackError> {
    let mut out = t.clone();
    if t.is_empty() {
        return Ok(out);
    }
    let consecutive = |a: usize, b: usize| t.entries[b].frame_index == t.entries[a].frame_index + 1;
    let mut filter = OneEuroFilter::new(*params)?;
    for (s, e) in runs(t, consecutive) {
        filter.reset();
        for i in s..e {
            let b = filter.filter(&t.entries[i].bbox.to_array())?;
            out.entries[i].bbox = BBox::from_array([b[0], b[1], b[2], b[3]]);
        }
    }
    let joint_run = |a: usize, b: usize| {
        consecutive(a, b) && t.entries[a].joints2d.is_some() && t.entries[b].joints2d.is_some()
    };
    for (s, e) in runs(t, joint_run) {
        if t.entries[s].joints2d.is_none() {
            continue;
        }
        filter.reset();
        for i in s..e {
            let flat: Vec<f64> = t.entries[i].joints2d.as_ref().unwrap().iter().flatten().copied().collect();
            let y = filter.filter(&flat)?;
            out.entries[i].joints2d = Some(y.chunks(2).map(|c| [c[0], c[1]]).collect());
        }
    }
    Ok(out)
}

/// Build → handedness filter → merge → hand-count filter → gap fill → smoothing.
pub fn run_hoi_pipeline(stream: &DetectionStream, config: &HoiConfig) -> Result<HoiOutput, TrackError> {
    config.one_euro.validate()?;
    if stream.is_empty() {
        return Ok(HoiOutput::default());
    }
    let (tracklets, assoc) = build_tracklets(stream, &config.tracker);
    let (tracklets, assoc) = handedness_filter(tracklets, assoc, stream, config.handedness_min_share);
    let (tracklets, assoc) = merge_tracklets(tracklets, assoc, &config.merge);
    let (tracklets, _) = number_of_hands_filter(tracklets, assoc, config.max_per_hand);
    let tracklets = tracklets
        .iter()
        .map(|t| smooth_tracklet(&fill_gaps(t, config.max_fill_gap), &config.one_euro))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HoiOutput { tracklets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::Detection;

    fn hand_det(frame: usize, x: f64, hand: Handedness) -> Detection {
        let mut d = Detection::new(frame, BBox::new(x, 100.0, x + 60.0, 160.0).unwrap(), 0.9, hand);
        d.joints2d = Some((0..21).map(|k| [x + k as f64, 120.0]).collect());
        d
    }

    #[test]
    fn empty_stream() {
        let out = run_hoi_pipeline(&DetectionStream::default(), &HoiConfig::default()).unwrap();
        assert!(out.tracklets.is_empty());
    }

    #[test]
    fn clean_two_hands() {
        let mut dets = Vec::new();
        for f in 0..40 {
            dets.push(hand_det(f, 50.0, Handedness::Left));
            dets.push(hand_det(f, 400.0, Handedness::Right));
        }
        let out = run_hoi_pipeline(&DetectionStream::new(dets).unwrap(), &HoiConfig::default()).unwrap();
        assert_eq!(out.tracklets.len(), 2);
        let left = out.hand(Handedness::Left).unwrap();
        assert_eq!(left.len(), 40);
        assert_eq!(left.box_at(7).unwrap().x1, 50.0);
        let seq = out.joint_sequence(Handedness::Right, 45);
        assert_eq!(seq[10].get(3), Some([403.0, 120.0]));
        assert_eq!(seq[42].visible_count(), 0);
    }

    #[test]
    fn dropout_filled_and_flagged() {
        let dets: Vec<_> =
            (0..30).filter(|f| !(10..13).contains(f)).map(|f| hand_det(f, 50.0, Handedness::Left)).collect();
        let out = run_hoi_pipeline(&DetectionStream::new(dets).unwrap(), &HoiConfig::default()).unwrap();
        let t = out.hand(Handedness::Left).unwrap();
        assert_eq!(t.len(), 30);
        assert!(t.entry_at(11).unwrap().interpolated);
        assert!(!t.entry_at(9).unwrap().interpolated);
    }

    #[test]
    fn smoothing_restarts_at_breaks() {
        let dets: Vec<_> = (0..10)
            .chain(40..50)
            .map(|f| hand_det(f, if f < 40 { 0.0 } else { 300.0 }, Handedness::Left))
            .collect();
        let stream = DetectionStream::new(dets).unwrap();
        let (ts, _) = build_tracklets(&stream, &HoiConfig::default().tracker);
        let merged = Tracklet { entries: ts.iter().flat_map(|t| t.entries.clone()).collect(), ..ts[0].clone() };
        let s = smooth_tracklet(&merged, &OneEuroParams::default()).unwrap();
        // the first sample after the break passes through unchanged
        assert_eq!(s.entry_at(40).unwrap().bbox.x1, 300.0);
    }

    #[test]
    fn second_pass_changes_nothing() {
        let dets: Vec<_> = (0..30)
            .filter(|f| f % 7 != 3)
            .flat_map(|f| [hand_det(f, 50.0, Handedness::Left), hand_det(f, 400.0, Handedness::Right)])
            .collect();
        let config = HoiConfig::default();
        let first = run_hoi_pipeline(&DetectionStream::new(dets).unwrap(), &config).unwrap();
        let again: Vec<Detection> = first
            .tracklets
            .iter()
            .flat_map(|t| {
                t.entries.iter().map(|e| Detection {
                    joints2d: e.joints2d.clone(),
                    ..Detection::new(e.frame_index, e.bbox, e.confidence, t.handedness)
                })
            })
            .collect();
        let second = run_hoi_pipeline(&DetectionStream::new(again).unwrap(), &config).unwrap();
        assert_eq!(first.tracklets.len(), second.tracklets.len());
        for (a, b) in first.tracklets.iter().zip(&second.tracklets) {
            assert_eq!(a.handedness, b.handedness);
            let geometry = |t: &Tracklet| t.entries.iter().map(|e| (e.frame_index, e.bbox, e.joints2d.clone())).collect::<Vec<_>>();
            assert_eq!(geometry(a), geometry(b));
        }
    }
}
