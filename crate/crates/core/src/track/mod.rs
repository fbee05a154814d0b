//! Hand tracking and association over per-frame detections: tracklet
//! seeding and propagation, handedness/merge/count filters, gap filling,
//! and OneEuro smoothing.

mod bbox;
mod detection;
mod filters;
mod gaps;
mod hoi;
mod one_euro;
mod tracklet;

pub use bbox::{box_iou, BBox};
pub use detection::{DetId, Detection, DetectionStream, Handedness};
pub use filters::{handedness_filter, merge_tracklets, number_of_hands_filter, MergeParams};
pub use gaps::fill_gaps;
pub use hoi::{run_hoi_pipeline, smooth_tracklet, HoiConfig, HoiOutput};
pub use one_euro::{one_euro, one_euro_scalar, smoothing_factor, OneEuroFilter, OneEuroParams};
pub use tracklet::{
    build_tracklets, propagate_track, AssociationMap, TrackEntry, TrackerBackend, TrackerParams,
    Tracklet, TrackletId, TrackletSource,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
