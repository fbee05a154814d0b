//! Rigid poses, pinhole projection and planar homographies.

mod camera;
mod homography;
mod pose;
mod ransac;
mod warp;

pub use camera::{project_points, CameraModel};
pub use homography::{
    apply_homography, estimate_homography_dlt, symmetric_transfer_error, Correspondence,
    Degeneracy, Homography,
};
pub use pose::Pose3;
pub use ransac::{estimate_homography_ransac, RansacParams, RansacResult};
pub use warp::warp_frame;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("need at least 4 correspondences, got {0}")]
    TooFewPairs(usize),
    #[error("degenerate configuration: {0}")]
    Degenerate(Degeneracy),
    #[error("no model reached 4 inliers (best had {best})")]
    NoConsensus { best: usize },
}
