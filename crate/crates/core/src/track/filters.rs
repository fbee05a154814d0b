use serde::{Deserialize, Serialize};

use super::{box_iou, AssociationMap, DetectionStream, Handedness, Tracklet, TrackletSource};

/// Relabel each tracklet by the confidence-weighted majority handedness of its
/// associated detections and drop minority-label associations. Tracklets whose
/// majority share is below `min_share` are removed.
pub fn handedness_filter(
    tracklets: Vec<Tracklet>,
    mut assoc: AssociationMap,
    stream: &DetectionStream,
    min_share: f64,
) -> (Vec<Tracklet>, AssociationMap) {
    let mut kept = Vec::with_capacity(tracklets.len());
    for mut t in tracklets {
        let dets = assoc.get(t.id);
        let (mut left, mut right) = (0.0, 0.0);
        for &d in dets {
            let det = stream.get(d);
            match det.handedness {
                Handedness::Left => left += det.confidence,
                Handedness::Right => right += det.confidence,
            }
        }
        let total = left + right;
        // zero-confidence associations carry no vote; keep the seeded label
        let (label, share) = if total <= 0.0 {
            (t.handedness, 1.0)
        } else if left >= right {
            (Handedness::Left, left / total)
        } else {
            (Handedness::Right, right / total)
        };
        if share < min_share {
            assoc.map.remove(&t.id);
            continue;
        }
        t.handedness = label;
        if let Some(list) = assoc.map.get_mut(&t.id) {
            list.retain(|&d| stream.get(d).handedness == label);
        }
        kept.push(t);
    }
    (kept, assoc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergeParams {
    /// Largest number of missing frames between two merge candidates.
    pub max_gap: usize,
    pub iou_threshold: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        Self { max_gap: 15, iou_threshold: 0.3 }
    }
}

/// Candidate check for `earlier` (starting no later than `later`) and `later`.
///
/// The reference box is `earlier`'s latest entry at or before `later`'s first
/// frame; for non-overlapping tracklets this is simply `earlier`'s last box.
/// Returns the gap in missing frames (−1 when frames coincide) and the IoU.
fn merge_score(earlier: &Tracklet, later: &Tracklet, params: &MergeParams) -> Option<(i64, f64)> {
    if earlier.handedness != later.handedness {
        return None;
    }
    let start = later.first_frame();
    let reference = earlier.entry_at_or_before(start)?;
    let gap = start as i64 - reference.frame_index as i64 - 1;
    if gap > params.max_gap as i64 {
        return None;
    }
    let iou = box_iou(&reference.bbox, &later.entries[0].bbox);
    (iou >= params.iou_threshold).then_some((gap, iou))
}

fn union_entries(a: &Tracklet, b: &Tracklet) -> Vec<super::TrackEntry> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.entries.len() || j < b.entries.len() {
        let take_a = match (a.entries.get(i), b.entries.get(j)) {
            (Some(x), Some(y)) if x.frame_index == y.frame_index => {
                let keep_a = x.confidence >= y.confidence;
                out.push(if keep_a { x.clone() } else { y.clone() });
                i += 1;
                j += 1;
                continue;
            }
            (Some(x), Some(y)) => x.frame_index < y.frame_index,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_a {
            out.push(a.entries[i].clone());
            i += 1;
        } else {
            out.push(b.entries[j].clone());
            j += 1;
        }
    }
    out
}

/// Merge same-handedness tracklets separated by at most `max_gap` missing
/// frames whose boundary boxes overlap by at least `iou_threshold`, repeated
/// until no pair qualifies. The best pair (smallest gap, then highest IoU) is
/// merged first; the merged tracklet keeps the smaller id.
pub fn merge_tracklets(
    mut tracklets: Vec<Tracklet>,
    mut assoc: AssociationMap,
    params: &MergeParams,
) -> (Vec<Tracklet>, AssociationMap) {
    tracklets.retain(|t| !t.is_empty());
    loop {
        tracklets.sort_by_key(|t| (t.first_frame(), t.id));
        let mut best: Option<(i64, f64, usize, usize)> = None;
        for i in 0..tracklets.len() {
            for j in i + 1..tracklets.len() {
                let Some((gap, iou)) = merge_score(&tracklets[i], &tracklets[j], params) else { continue };
                let better = match best {
                    None => true,
                    Some((g, v, _, _)) => gap < g || (gap == g && iou > v),
                };
                if better {
                    best = Some((gap, iou, i, j));
                }
            }
        }
        let Some((_, _, i, j)) = best else { break };
        let later = tracklets.remove(j);
        let earlier = &mut tracklets[i];
        earlier.entries = union_entries(earlier, &later);
        earlier.source = TrackletSource::Merged;
        let keep_id = earlier.id.min(later.id);
        let drop_id = earlier.id.max(later.id);
        earlier.id = keep_id;
        let mut dets = assoc.map.remove(&keep_id).unwrap_or_default();
        dets.extend(assoc.map.remove(&drop_id).unwrap_or_default());
        dets.sort();
        dets.dedup();
        assoc.map.insert(keep_id, dets);
    }
    tracklets.sort_by_key(|t| t.id);
    (tracklets, assoc)
}

/// Keep the `max_per_hand` longest tracklets per handedness (ties: higher mean
/// confidence, then lower id).
pub fn number_of_hands_filter(
    tracklets: Vec<Tracklet>,
    mut assoc: AssociationMap,
    max_per_hand: usize,
) -> (Vec<Tracklet>, AssociationMap) {
    let mut kept = Vec::new();
    for hand in [Handedness::Left, Handedness::Right] {
        let mut group: Vec<&Tracklet> = tracklets.iter().filter(|t| t.handedness == hand).collect();
        group.sort_by(|a, b| {
            b.len()
                .cmp(&a.len())
                .then(b.mean_confidence().total_cmp(&a.mean_confidence()))
                .then(a.id.cmp(&b.id))
        });
        kept.extend(group.into_iter().take(max_per_hand).cloned());
    }
    kept.sort_by_key(|t| t.id);
    assoc.retain_tracklets(&kept);
    (kept, assoc)
}
