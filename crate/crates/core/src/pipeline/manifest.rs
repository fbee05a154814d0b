use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::records::{read_jsonl, write_jsonl};
use super::PipelineError;

/// One clip. Paths are relative to the manifest's directory unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub schema_version: u32,
    pub clip_id: String,
    pub frame_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_log: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondence_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    pub fps: f64,
    /// Set by external filters; excluded clips are skipped by every command.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exclude: bool,
}

impl ManifestEntry {
    pub fn new(clip_id: impl Into<String>, frame_dir: impl Into<PathBuf>, fps: f64) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            clip_id: clip_id.into(),
            frame_dir: frame_dir.into(),
            camera_file: None,
            state_log: None,
            detection_file: None,
            correspondence_file: None,
            caption: None,
            fps,
            exclude: false,
        }
    }

    /// `(field name, path)` for every referenced path.
    pub fn referenced_paths(&self) -> Vec<(&'static str, &Path)> {
        let mut out = vec![("frame_dir", self.frame_dir.as_path())];
        let optional = [
            ("camera_file", &self.camera_file),
            ("state_log", &self.state_log),
            ("detection_file", &self.detection_file),
            ("correspondence_file", &self.correspondence_file),
        ];
        out.extend(optional.into_iter().filter_map(|(k, v)| v.as_deref().map(|p| (k, p))));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub clips: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(base_dir: impl Into<PathBuf>, clips: Vec<ManifestEntry>) -> Result<Self, PipelineError> {
        let m = Self { base_dir: base_dir.into(), clips };
        m.check_ids()?;
        Ok(m)
    }

    fn check_ids(&self) -> Result<(), PipelineError> {
        let mut seen = BTreeSet::new();
        for c in &self.clips {
            let id_ok = !c.clip_id.is_empty()
                && c.clip_id.chars().all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '_' | '-' | '.'))
                && c.clip_id != "."
                && c.clip_id != "..";
            if !id_ok {
                return Err(PipelineError::InvalidInput(format!(
                    "clip_id {:?} must be non-empty and use only [A-Za-z0-9_.-]",
                    c.clip_id
                )));
            }
            if !seen.insert(c.clip_id.as_str()) {
                return Err(PipelineError::InvalidInput(format!("clip_id {:?} appears more than once", c.clip_id)));
            }
            if !(c.fps > 0.0 && c.fps.is_finite()) {
                return Err(PipelineError::InvalidInput(format!("clip {}: fps must be positive, got {}", c.clip_id, c.fps)));
            }
        }
        Ok(())
    }

    /// Parses the manifest; file existence is checked per clip by [`Manifest::check_entry`].
    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        let clips: Vec<ManifestEntry> = read_jsonl(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(base_dir, clips).map_err(|e| PipelineError::io(path, e))
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        write_jsonl(path, &self.clips)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn get(&self, clip_id: &str) -> Option<&ManifestEntry> {
        self.clips.iter().find(|c| c.clip_id == clip_id)
    }

    /// First referenced path that does not exist, as `(field, expectation)`.
    pub fn check_entry(&self, entry: &ManifestEntry) -> Result<(), (String, String)> {
        for (field, p) in entry.referenced_paths() {
            let full = self.resolve(p);
            let ok = if field == "frame_dir" { full.is_dir() } else { full.is_file() };
            if !ok {
                let kind = if field == "frame_dir" { "directory" } else { "file" };
                return Err((field.to_string(), format!("existing {kind} at {}", full.display())));
            }
        }
        Ok(())
    }

    /// Clips selected by id (all when `ids` is empty), excluded clips removed.
    pub fn select(&self, ids: &[String]) -> Result<Vec<&ManifestEntry>, PipelineError> {
        if let Some(missing) = ids.iter().find(|id| self.get(id).is_none()) {
            return Err(PipelineError::InvalidInput(format!("clip {missing:?} is not in the manifest")));
        }
        Ok(self.clips.iter().filter(|c| !c.exclude && (ids.is_empty() || ids.contains(&c.clip_id))).collect())
    }
}
