//! Dataset plumbing: manifests, line-delimited record files, frame
//! directories, clip sampling, layered configuration and the synthetic
//! scene generator.

mod config;
mod frames;
mod manifest;
mod records;
mod sampling;
mod synth;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::PipelineConfig;
pub use frames::{frame_file_name, probe_frames, read_frames, read_masks, write_frames, write_masks};
pub use manifest::{Manifest, ManifestEntry};
pub use records::{
    read_camera, read_correspondences, read_detections, read_jsonl, read_states, robot_prompt_joints, write_camera,
    write_jsonl, CorrespondenceRecord, DetectionFrameRecord, DetectionRecord, EpisodeRecord, HandRecord,
    HandTruthRecord, HomographyTruthRecord, Record, RectifiedRecord, StateRecord, TrackRecord,
};
pub use sampling::{gripper_events, sample_clips, ClipWindow, SamplingParams};
pub use synth::{
    synth_generate, synth_hands, synth_robot_episode, synth_write, EpisodeSpec, NoiseSpec, SceneObject, SynthHandClip, SynthOutput, SynthRobotEpisode,
    SynthScene,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Record { path: PathBuf, line: usize, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        PipelineError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub(crate) fn record(path: &Path, line: usize, message: impl Into<String>) -> Self {
        PipelineError::Record { path: path.to_path_buf(), line, message: message.into() }
    }
}
