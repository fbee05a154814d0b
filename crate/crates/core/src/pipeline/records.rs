use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::geom::{project_points, CameraModel, Correspondence, Pose3};
use crate::joints::{JointSet2D, Point2};
use crate::rectify::{DiscardReason, FrameCorrespondences, FrameStatus};
use crate::skeleton::{gripper_fk, GripperState, GripperTemplate};
use crate::track::{BBox, Detection, DetectionStream, Handedness};
use crate::SCHEMA_VERSION;

/// A line of a versioned record file.
pub trait Record: Serialize + DeserializeOwned {
    fn schema_version(&self) -> u32;
}

macro_rules! record {
    ($($t:ty),*) => {
        $(impl Record for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        })*
    };
}

/// One robot state per video frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub timestamp_s: f64,
    /// Base-to-end-effector pose, 4×4 row-major.
    pub ee_pose: Pose3,
    pub openness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub confidence: f64,
    pub handedness: Handedness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints2d: Option<Vec<Point2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFrameRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub detections: Vec<DetectionRecord>,
}

/// Pairs are `[src_x, src_y, dst_x, dst_y, weight]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub pairs: Vec<[f64; 5]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandRecord {
    pub handedness: Handedness,
    pub tracklet_id: u32,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub confidence: f64,
    pub interpolated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints2d: Option<Vec<Point2>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub hands: Vec<HandRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectifiedRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub homography: [f64; 9],
    pub status: FrameStatus,
    pub inlier_ratio: Option<f64>,
    pub joints2d: JointSet2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub schema_version: u32,
    pub clip_id: String,
    pub keep: bool,
    pub reason: Option<DiscardReason>,
    pub episode_median: f64,
    pub bad_fraction: f64,
    pub frames_evaluated: usize,
    pub frames_skipped: usize,
}

/// Ground truth written by the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomographyTruthRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub homography: [f64; 9],
    pub joints2d: JointSet2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandTruthRecord {
    pub schema_version: u32,
    pub frame_index: usize,
    pub hands: Vec<DetectionRecord>,
}

record!(
    StateRecord,
    DetectionFrameRecord,
    CorrespondenceRecord,
    TrackRecord,
    RectifiedRecord,
    EpisodeRecord,
    HomographyTruthRecord,
    HandTruthRecord,
    super::ClipWindow,
    super::ManifestEntry
);

pub fn read_jsonl<T: Record>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(line).map_err(|e| PipelineError::record(path, i + 1, e.to_string()))?;
        if rec.schema_version() != SCHEMA_VERSION {
            return Err(PipelineError::record(
                path,
                i + 1,
                format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", rec.schema_version()),
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| PipelineError::io(path, e))?;
        w.write_all(b"\n").map_err(|e| PipelineError::io(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

pub fn read_camera(path: &Path) -> Result<CameraModel, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let cam: CameraModel = serde_json::from_str(&text).map_err(|e| PipelineError::record(path, 1, e.to_string()))?;
    cam.validate().map_err(|e| PipelineError::record(path, 1, e.to_string()))?;
    Ok(cam)
}

pub fn write_camera(path: &Path, cam: &CameraModel) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(cam).map_err(|e| PipelineError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn check_contiguous(path: &Path, indices: impl Iterator<Item = usize>) -> Result<(), PipelineError> {
    for (i, f) in indices.enumerate() {
        if f != i {
            return Err(PipelineError::record(path, i + 1, format!("frame_index {f}, expected {i}")));
        }
    }
    Ok(())
}

/// State log with frame indices `0..n` in order and openness in `[0, 1]`.
pub fn read_states(path: &Path) -> Result<Vec<StateRecord>, PipelineError> {
    let states: Vec<StateRecord> = read_jsonl(path)?;
    check_contiguous(path, states.iter().map(|s| s.frame_index))?;
    for (i, s) in states.iter().enumerate() {
        if !(0.0..=1.0).contains(&s.openness) || !s.timestamp_s.is_finite() {
            return Err(PipelineError::record(path, i + 1, "openness must be in [0, 1] and timestamp finite"));
        }
    }
    Ok(states)
}

pub fn read_detections(path: &Path) -> Result<DetectionStream, PipelineError> {
    let frames: Vec<DetectionFrameRecord> = read_jsonl(path)?;
    let mut dets = Vec::new();
    for (line, f) in frames.into_iter().enumerate() {
        for r in f.detections {
            let d = Detection {
                frame_index: f.frame_index,
                bbox: r.bbox,
                confidence: r.confidence,
                handedness: r.handedness,
                joints2d: r.joints2d,
                track_id: r.track_id,
            };
            d.validate().map_err(|e| PipelineError::record(path, line + 1, e.to_string()))?;
            dets.push(d);
        }
    }
    DetectionStream::new(dets).map_err(|e| PipelineError::record(path, 0, e.to_string()))
}

pub fn read_correspondences(path: &Path) -> Result<Vec<FrameCorrespondences>, PipelineError> {
    let recs: Vec<CorrespondenceRecord> = read_jsonl(path)?;
    recs.into_iter()
        .enumerate()
        .map(|(line, r)| {
            let pairs: Vec<Correspondence> = r
                .pairs
                .iter()
                .map(|p| Correspondence { src: [p[0], p[1]], dst: [p[2], p[3]], weight: p[4] })
                .collect();
            if let Some(k) = pairs.iter().position(|c| !c.is_valid()) {
                return Err(PipelineError::record(path, line + 1, format!("pair {k} is not finite or has negative weight")));
            }
            Ok(FrameCorrespondences { frame_index: r.frame_index, pairs })
        })
        .collect()
}

/// Gripper joints in pixel space for every logged state.
pub fn robot_prompt_joints(
    states: &[StateRecord],
    camera: &CameraModel,
    template: &GripperTemplate,
) -> Result<Vec<JointSet2D>, PipelineError> {
    states
        .iter()
        .map(|s| {
            let state = GripperState::new(s.ee_pose, s.openness)
                .map_err(|e| PipelineError::InvalidInput(format!("frame {}: {e}", s.frame_index)))?;
            project_points(&gripper_fk(&state, template), camera)
                .map_err(|e| PipelineError::InvalidInput(format!("frame {}: {e}", s.frame_index)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_lines_are_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        fs::write(&p, "{\"schema_version\":1,\"frame_index\":0,\"pairs\":[]}\n{\"schema_version\":1,\"frame_index\":1,\"pairs\":[[1,2,3,NaN,1]]}\n").unwrap();
        let err = read_correspondences(&p).unwrap_err();
        assert!(matches!(err, PipelineError::Record { line: 2, .. }), "{err}");
        fs::write(&p, "{\"schema_version\":2,\"frame_index\":0,\"pairs\":[]}\n").unwrap();
        assert!(read_correspondences(&p).unwrap_err().to_string().contains("schema_version"));
        fs::write(&p, "{\"schema_version\":1,\"frame_in").unwrap();
        assert!(read_correspondences(&p).is_err());
    }

    #[test]
    fn detections_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        let rec = DetectionFrameRecord {
            schema_version: 1,
            frame_index: 3,
            detections: vec![DetectionRecord {
                bbox: BBox::new(1.0, 2.0, 30.0, 40.0).unwrap(),
                confidence: 0.8,
                handedness: Handedness::Left,
                joints2d: None,
                track_id: Some(4),
            }],
        };
        write_jsonl(&p, &[rec.clone()]).unwrap();
        let line = fs::read_to_string(&p).unwrap();
        assert!(line.contains("\"box\":[1.0,2.0,30.0,40.0]"), "{line}");
        assert_eq!(read_jsonl::<DetectionFrameRecord>(&p).unwrap(), vec![rec]);
        let stream = read_detections(&p).unwrap();
        assert_eq!(stream.len(), 1);
    }

    #[test]
    fn states_must_be_contiguous() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        let s = |i| StateRecord { schema_version: 1, frame_index: i, timestamp_s: 0.0, ee_pose: Pose3::identity(), openness: 0.5 };
        write_jsonl(&p, &[s(0), s(2)]).unwrap();
        assert!(matches!(read_states(&p), Err(PipelineError::Record { line: 2, .. })));
    }
}
