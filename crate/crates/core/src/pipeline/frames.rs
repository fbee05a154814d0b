use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageFormat, RgbImage};

use super::{records::read_jsonl, PipelineError};
use crate::mask::{BinaryMask, RleFrame};
use crate::SCHEMA_VERSION;

pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| PipelineError::io(dir, e))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(PipelineError::io(dir, "no PNG frames found"));
    }
    Ok(files)
}

/// Frame count and `(width, height)` of the first frame, without decoding pixels.
pub fn probe_frames(dir: &Path) -> Result<(usize, (u32, u32)), PipelineError> {
    let files = png_files(dir)?;
    let dims = image::image_dimensions(&files[0]).map_err(|e| PipelineError::io(&files[0], e))?;
    Ok((files.len(), dims))
}

/// PNG frames of a directory in file-name order, converted to RGB.
pub fn read_frames(dir: &Path) -> Result<Vec<RgbImage>, PipelineError> {
    let frames = png_files(dir)?
        .iter()
        .map(|p| image::open(p).map(|im| im.to_rgb8()).map_err(|e| PipelineError::io(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let dims = frames[0].dimensions();
    if let Some(i) = frames.iter().position(|f| f.dimensions() != dims) {
        return Err(PipelineError::io(dir, format!("frame {i} is {:?}, expected {dims:?}", frames[i].dimensions())));
    }
    Ok(frames)
}

pub fn write_frames(dir: &Path, frames: &[RgbImage]) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        let p = dir.join(frame_file_name(i));
        f.save_with_format(&p, ImageFormat::Png).map_err(|e| PipelineError::io(&p, e))?;
    }
    Ok(())
}

/// Masks from a directory of single-channel PNGs (nonzero is set), or from
/// a run-length record file.
pub fn read_masks(path: &Path) -> Result<Vec<BinaryMask>, PipelineError> {
    if path.is_dir() {
        return png_files(path)?
            .iter()
            .map(|p| image::open(p).map(|im| BinaryMask::from_gray(&im.to_luma8())).map_err(|e| PipelineError::io(p, e)))
            .collect();
    }
    let recs: Vec<RleFrame> = read_jsonl(path)?;
    recs.iter()
        .enumerate()
        .map(|(i, r)| {
            if r.frame_index != i {
                return Err(PipelineError::record(path, i + 1, format!("frame_index {}, expected {i}", r.frame_index)));
            }
            BinaryMask::from_rle(r.width, r.height, &r.counts)
                .ok_or_else(|| PipelineError::record(path, i + 1, "run lengths do not sum to width × height"))
        })
        .collect()
}

/// Masks as 0/255 PNGs.
pub fn write_masks(dir: &Path, masks: &[BinaryMask]) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    for (i, m) in masks.iter().enumerate() {
        let p = dir.join(frame_file_name(i));
        m.to_gray().save_with_format(&p, ImageFormat::Png).map_err(|e| PipelineError::io(&p, e))?;
    }
    Ok(())
}

impl super::Record for RleFrame {
    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

impl RleFrame {
    pub fn from_mask(frame_index: usize, mask: &BinaryMask) -> Self {
        RleFrame {
            schema_version: SCHEMA_VERSION,
            frame_index,
            width: mask.width(),
            height: mask.height(),
            counts: mask.to_rle(),
        }
    }
}
