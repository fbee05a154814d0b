use super::{TrackEntry, Tracklet};

/// Fill internal gaps of at most `max_gap` missing frames by linear
/// interpolation of boxes, confidences and (when both ends have them) joints.
/// Filled entries are flagged `interpolated`; existing entries are untouched.
pub fn fill_gaps(tracklet: &Tracklet, max_gap: usize) -> Tracklet {
    let mut entries = Vec::with_capacity(tracklet.len());
    for (i, e) in tracklet.entries.iter().enumerate() {
        if let Some(next) = tracklet.entries.get(i + 1) {
            entries.push(e.clone());
            let missing = next.frame_index - e.frame_index - 1;
            if missing == 0 || missing > max_gap {
                continue;
            }
            let span = (next.frame_index - e.frame_index) as f64;
            for k in 1..=missing {
                let t = k as f64 / span;
                let joints2d = match (&e.joints2d, &next.joints2d) {
                    (Some(a), Some(b)) if a.len() == b.len() => Some(
                        a.iter()
                            .zip(b)
                            .map(|(p, q)| [p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t])
                            .collect(),
                    ),
                    _ => None,
                };
                entries.push(TrackEntry {
                    frame_index: e.frame_index + k,
                    bbox: e.bbox.lerp(&next.bbox, t),
                    confidence: e.confidence + (next.confidence - e.confidence) * t,
                    joints2d,
                    detection: None,
                    interpolated: true,
                });
            }
        } else {
            entries.push(e.clone());
        }
    }
    Tracklet { entries, ..tracklet.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::{BBox, Handedness, TrackletId, TrackletSource};

    fn entry(frame: usize, x: f64) -> TrackEntry {
        TrackEntry {
            frame_index: frame,
            bbox: BBox::new(x, 0.0, x + 10.0, 10.0).unwrap(),
            confidence: 0.8,
            joints2d: Some(vec![[x, 1.0]; 21]),
            detection: None,
            interpolated: false,
        }
    }

    fn tracklet(entries: Vec<TrackEntry>) -> Tracklet {
        Tracklet { id: TrackletId(0), handedness: Handedness::Left, source: TrackletSource::Seeded, entries }
    }

    #[test]
    fn gapless_unchanged() {
        let t = tracklet((0..5).map(|f| entry(f, 0.0)).collect());
        assert_eq!(fill_gaps(&t, 12), t);
    }

    #[test]
    fn midpoint() {
        let t = tracklet(vec![entry(0, 0.0), entry(2, 10.0)]);
        let out = fill_gaps(&t, 12);
        assert_eq!(out.len(), 3);
        let mid = &out.entries[1];
        assert!(mid.interpolated);
        assert_eq!(mid.bbox.to_array(), [5.0, 0.0, 15.0, 10.0]);
        assert_eq!(mid.joints2d.as_ref().unwrap()[0], [5.0, 1.0]);
        assert_eq!(out.entries[0], t.entries[0]);
        assert_eq!(out.entries[2], t.entries[1]);
    }

    #[test]
    fn long_gap_untouched() {
        let t = tracklet(vec![entry(0, 0.0), entry(14, 10.0)]);
        assert_eq!(fill_gaps(&t, 12), t);
        let t = tracklet(vec![entry(0, 0.0), entry(13, 10.0)]);
        assert_eq!(fill_gaps(&t, 12).len(), 14);
    }

    #[test]
    fn missing_joints_not_invented() {
        let mut b = entry(3, 6.0);
        b.joints2d = None;
        let out = fill_gaps(&tracklet(vec![entry(0, 0.0), b]), 12);
        assert!(out.entries[1].joints2d.is_none());
    }
}
