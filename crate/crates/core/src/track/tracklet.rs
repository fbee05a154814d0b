use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{box_iou, BBox, DetId, Detection, DetectionStream, Handedness};
use crate::joints::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrackletId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackletSource {
    Seeded,
    Merged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackEntry {
    pub frame_index: usize,
    pub bbox: BBox,
    pub confidence: f64,
    pub joints2d: Option<Vec<Point2>>,
    /// The detection adopted at this frame; `None` for interpolated entries.
    pub detection: Option<DetId>,
    pub interpolated: bool,
}

impl TrackEntry {
    fn adopt(id: DetId, d: &Detection) -> Self {
        Self {
            frame_index: id.frame,
            bbox: d.bbox,
            confidence: d.confidence,
            joints2d: d.joints2d.clone(),
            detection: Some(id),
            interpolated: false,
        }
    }
}

/// One subject's boxes over time. Entries are sorted by strictly increasing frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: TrackletId,
    pub handedness: Handedness,
    pub source: TrackletSource,
    pub entries: Vec<TrackEntry>,
}

impl Tracklet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_frame(&self) -> usize {
        self.entries[0].frame_index
    }

    pub fn last_frame(&self) -> usize {
        self.entries[self.entries.len() - 1].frame_index
    }

    pub fn frames(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.frame_index)
    }

    pub fn entry_at(&self, frame: usize) -> Option<&TrackEntry> {
        self.entries.binary_search_by_key(&frame, |e| e.frame_index).ok().map(|i| &self.entries[i])
    }

    pub fn box_at(&self, frame: usize) -> Option<BBox> {
        self.entry_at(frame).map(|e| e.bbox)
    }

    /// Latest entry at or before `frame`.
    pub fn entry_at_or_before(&self, frame: usize) -> Option<&TrackEntry> {
        let i = self.entries.partition_point(|e| e.frame_index <= frame);
        i.checked_sub(1).map(|i| &self.entries[i])
    }

    /// Mean confidence over observed (non-interpolated) entries.
    pub fn mean_confidence(&self) -> f64 {
        let (sum, n) = self
            .entries
            .iter()
            .filter(|e| !e.interpolated)
            .fold((0.0, 0usize), |(s, n), e| (s + e.confidence, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn is_sorted(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].frame_index < w[1].frame_index)
    }
}

/// Tracklet id → associated detections, sorted by `(frame, index)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssociationMap {
    pub map: BTreeMap<TrackletId, Vec<DetId>>,
}

impl AssociationMap {
    pub fn get(&self, id: TrackletId) -> &[DetId] {
        self.map.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total(&self) -> usize {
        self.map.values().map(Vec::len).sum()
    }

    pub fn retain_tracklets(&mut self, tracklets: &[Tracklet]) {
        self.map.retain(|id, _| tracklets.iter().any(|t| t.id == *id));
    }

    /// Every association satisfies `IoU(detection, tracklet box at that frame) ≥ threshold`.
    pub fn satisfies_threshold(&self, stream: &DetectionStream, tracklets: &[Tracklet], threshold: f64) -> bool {
        self.map.iter().all(|(id, dets)| {
            let Some(t) = tracklets.iter().find(|t| t.id == *id) else { return false };
            dets.iter().all(|&d| {
                t.box_at(d.frame).is_some_and(|b| box_iou(&stream.get(d).bbox, &b) >= threshold)
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackerBackend {
    /// Built-in constant-velocity IoU propagation.
    #[default]
    ConstantVelocity,
    /// Use `track_id` identities supplied with the detections; seeds
    /// without one fall back to constant-velocity propagation.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerParams {
    pub iou_threshold: f64,
    /// Propagation stops after this many consecutive frames without an adoption.
    pub gap_limit: usize,
    pub backend: TrackerBackend,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self { iou_threshold: 0.5, gap_limit: 8, backend: TrackerBackend::ConstantVelocity }
    }
}

fn propagate_direction(
    seed: DetId,
    stream: &DetectionStream,
    params: &TrackerParams,
    forward: bool,
    (lo, hi): (usize, usize),
) -> Vec<TrackEntry> {
    let mut history: Vec<(usize, BBox)> = vec![(seed.frame, stream.get(seed).bbox)];
    let mut out = Vec::new();
    let mut frame = seed.frame;
    let mut misses = 0;
    loop {
        frame = match (forward, frame) {
            (true, f) if f < hi => f + 1,
            (false, f) if f > lo => f - 1,
            _ => break,
        };
        let (f1, b1) = history[history.len() - 1];
        let predicted = match history.len() {
            1 => b1,
            n => {
                let (f0, b0) = history[n - 2];
                let step = (frame as f64 - f1 as f64) / (f1 as f64 - f0 as f64);
                b1.extrapolate(&b0, step)
            }
        };
        let best = stream
            .in_frame(frame)
            .iter()
            .enumerate()
            .map(|(i, d)| (i, box_iou(&d.bbox, &predicted)))
            .filter(|&(_, iou)| iou >= params.iou_threshold)
            .fold(None, |acc: Option<(usize, f64)>, (i, iou)| match acc {
                Some((_, best)) if best >= iou => acc,
                _ => Some((i, iou)),
            });
        match best {
            Some((index, _)) => {
                let id = DetId { frame, index };
                let d = stream.get(id);
                history.push((frame, d.bbox));
                out.push(TrackEntry::adopt(id, d));
                misses = 0;
            }
            None => {
                misses += 1;
                if misses >= params.gap_limit {
                    break;
                }
            }
        }
    }
    out
}

fn external_track(seed: DetId, track_id: u64, stream: &DetectionStream) -> Vec<TrackEntry> {
    let mut out = Vec::new();
    for (frame, dets) in stream.frames() {
        let best = dets
            .iter()
            .enumerate()
            .filter(|(_, d)| d.track_id == Some(track_id))
            .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                Some((_, c)) if c >= d.confidence => acc,
                _ => Some((i, d.confidence)),
            });
        let index = if frame == seed.frame { Some(seed.index) } else { best.map(|(i, _)| i) };
        if let Some(index) = index {
            let id = DetId { frame, index };
            out.push(TrackEntry::adopt(id, stream.get(id)));
        }
    }
    out
}

/// Track one seed detection forward and backward through the stream.
pub fn propagate_track(
    id: TrackletId,
    seed: DetId,
    stream: &DetectionStream,
    params: &TrackerParams,
) -> Tracklet {
    let seed_det = stream.get(seed);
    let entries = match (params.backend, seed_det.track_id) {
        (TrackerBackend::External, Some(tid)) => external_track(seed, tid, stream),
        _ => {
            let range = stream.frame_range().expect("seed is in the stream");
            let mut entries = propagate_direction(seed, stream, params, false, range);
            entries.reverse();
            entries.push(TrackEntry::adopt(seed, seed_det));
            entries.extend(propagate_direction(seed, stream, params, true, range));
            entries
        }
    };
    Tracklet { id, handedness: seed_det.handedness, source: TrackletSource::Seeded, entries }
}

/// Seed tracklets from untracked detections in descending confidence, then
/// associate every detection to every tracklet it overlaps by at least
/// `iou_threshold`. Confidence ties break by frame, then box position.
pub fn build_tracklets(stream: &DetectionStream, params: &TrackerParams) -> (Vec<Tracklet>, AssociationMap) {
    let mut order: Vec<(DetId, &Detection)> = stream.iter().collect();
    order.sort_by(|(ia, a), (ib, b)| b.confidence.total_cmp(&a.confidence).then(ia.cmp(ib)));

    let mut tracklets: Vec<Tracklet> = Vec::new();
    for (id, det) in order {
        let covered = tracklets
            .iter()
            .filter_map(|t| t.box_at(id.frame))
            .map(|b| box_iou(&det.bbox, &b))
            .fold(0.0, f64::max);
        if covered < params.iou_threshold || tracklets.is_empty() {
            let tid = TrackletId(tracklets.len() as u32);
            tracklets.push(propagate_track(tid, id, stream, params));
        }
    }

    let mut assoc = AssociationMap::default();
    for t in &tracklets {
        let dets: Vec<DetId> = t
            .entries
            .iter()
            .flat_map(|e| {
                stream
                    .in_frame(e.frame_index)
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| box_iou(&d.bbox, &e.bbox) >= params.iou_threshold)
                    .map(|(index, _)| DetId { frame: e.frame_index, index })
                    .collect::<Vec<_>>()
            })
            .collect();
        assoc.map.insert(t.id, dets);
    }
    (tracklets, assoc)
}
