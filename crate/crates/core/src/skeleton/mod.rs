//! Skeleton topologies, the gripper template, and deterministic rasterization
//! of 2D skeletons into RGB prompt frames.

mod gripper;
mod raster;
mod topology;
mod weight;

pub use gripper::{gripper_fk, gripper_topology, GripperState, GripperTemplate};
pub use raster::{draw_skeleton, render_clip, render_skeleton, PromptClip, RenderStyle, DEFAULT_CANVAS};
pub use topology::{hand_topology, SkeletonTopology, HAND_JOINTS};
pub use weight::{occupancy, region_weight_mask, WeightMap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeletonError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
}
