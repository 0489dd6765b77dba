//! A "video" on disk is a directory of numbered frames:
//! `frame_000000.png`, `frame_000001.png`, ...

use std::fs;
use std::path::{Path, PathBuf};

use super::{load_image, save_image, Image};
use crate::error::{Error, Result};

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

/// Image files (`.png`, `.ppm`, `.pgm`) in `dir`, sorted by file name.
pub fn list_frame_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "ppm" | "pgm"))
            .unwrap_or(false);
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every frame in `dir`; all frames must share one resolution and
/// channel layout.
pub fn load_frame_dir(dir: impl AsRef<Path>) -> Result<Vec<Image>> {
    let files = list_frame_files(dir)?;
    let mut frames: Vec<Image> = Vec::with_capacity(files.len());
    for path in &files {
        let img = load_image(path)?;
        if let Some(first) = frames.first() {
            if !first.same_shape(&img) {
                return Err(Error::DimensionMismatch(format!(
                    "{} is {}x{} {:?}, expected {}x{} {:?}",
                    path.display(),
                    img.width(),
                    img.height(),
                    img.channels(),
                    first.width(),
                    first.height(),
                    first.channels()
                )));
            }
        }
        frames.push(img);
    }
    Ok(frames)
}

pub fn save_frame_dir(dir: impl AsRef<Path>, frames: &[Image]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        save_image(f, dir.join(frame_file_name(i)))?;
    }
    Ok(())
}
