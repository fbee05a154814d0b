//! Construction, rectification and evaluation of visual action prompts:
//! rendered 2D skeletons of hands and robot grippers used to condition
//! action-driven video generation.
//!
//! Modules, bottom-up:
//! - [`geom`]: poses, pinhole projection, homography DLT/RANSAC and warping.
//! - [`skeleton`]: hand and gripper skeletons and the deterministic rasterizer.
//! - [`track`]: hand tracklet building, filtering, gap filling and smoothing.
//! - [`rectify`]: robot episode scoring, filtering and homography rectification.
//! - [`metrics`]: PSNR, SSIM, spatio-temporal IoU and mask/boundary/J&F scores.
//! - [`pipeline`]: manifests, record files, clip sampling and the synthetic generator.

pub mod geom;
pub mod joints;
pub mod mask;
pub mod metrics;
pub mod pipeline;
pub mod rectify;
pub mod skeleton;
pub mod track;

pub use geom::{CameraModel, Correspondence, Homography, Pose3};
pub use joints::{JointSet2D, JointSet3D, Point2, Point3};
pub use mask::BinaryMask;
pub use skeleton::{PromptClip, RenderStyle, SkeletonTopology};

/// Version stamped into every line-delimited record this crate writes.
pub const SCHEMA_VERSION: u32 = 1;
