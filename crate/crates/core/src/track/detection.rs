use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BBox, TrackError};
use crate::joints::Point2;
use crate::skeleton::HAND_JOINTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Handedness::Left => "left",
            Handedness::Right => "right",
        }
    }

    pub fn flipped(&self) -> Self {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
        }
    }
}

/// One hand detection in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_index: usize,
    pub bbox: BBox,
    pub confidence: f64,
    pub handedness: Handedness,
    pub joints2d: Option<Vec<Point2>>,
    /// Identity from an external tracker, when one was run upstream.
    pub track_id: Option<u64>,
}

impl Detection {
    pub fn new(frame_index: usize, bbox: BBox, confidence: f64, handedness: Handedness) -> Self {
        Self { frame_index, bbox, confidence, handedness, joints2d: None, track_id: None }
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        if !self.bbox.is_valid() {
            return Err(TrackError::InvalidInput(format!(
                "frame {}: box {:?} is not well-ordered",
                self.frame_index,
                self.bbox.to_array()
            )));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(TrackError::InvalidInput(format!(
                "frame {}: confidence {} outside [0, 1]",
                self.frame_index, self.confidence
            )));
        }
        if let Some(j) = &self.joints2d {
            if j.len() != HAND_JOINTS {
                return Err(TrackError::InvalidInput(format!(
                    "frame {}: expected {HAND_JOINTS} joints, got {}",
                    self.frame_index,
                    j.len()
                )));
            }
            if !j.iter().flatten().all(|v| v.is_finite()) {
                return Err(TrackError::InvalidInput(format!("frame {}: non-finite joint", self.frame_index)));
            }
        }
        Ok(())
    }

    /// Within-frame canonical order: box corners, then higher confidence first.
    fn canonical_cmp(&self, other: &Detection) -> Ordering {
        let (a, b) = (self.bbox.to_array(), other.bbox.to_array());
        a.iter()
            .zip(&b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.confidence.total_cmp(&self.confidence))
            .then_with(|| self.handedness.cmp(&other.handedness))
            .then_with(|| self.track_id.cmp(&other.track_id))
    }
}

/// Reference to a detection: frame and position in that frame's canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DetId {
    pub frame: usize,
    pub index: usize,
}

/// Validated detections grouped per frame, each frame in canonical order, so
/// downstream results do not depend on input ordering.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionStream {
    frames: BTreeMap<usize, Vec<Detection>>,
}

impl DetectionStream {
    pub fn new(detections: Vec<Detection>) -> Result<Self, TrackError> {
        let mut frames: BTreeMap<usize, Vec<Detection>> = BTreeMap::new();
        for d in detections {
            d.validate()?;
            frames.entry(d.frame_index).or_default().push(d);
        }
        for dets in frames.values_mut() {
            dets.sort_by(Detection::canonical_cmp);
        }
        Ok(Self { frames })
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn len(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn frame_range(&self) -> Option<(usize, usize)> {
        Some((*self.frames.keys().next()?, *self.frames.keys().next_back()?))
    }

    pub fn in_frame(&self, frame: usize) -> &[Detection] {
        self.frames.get(&frame).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn get(&self, id: DetId) -> &Detection {
        &self.frames[&id.frame][id.index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DetId, &Detection)> {
        self.frames.iter().flat_map(|(&frame, dets)| {
            dets.iter().enumerate().map(move |(index, d)| (DetId { frame, index }, d))
        })
    }

    pub fn frames(&self) -> impl Iterator<Item = (usize, &[Detection])> {
        self.frames.iter().map(|(&f, d)| (f, d.as_slice()))
    }
}
