//! IDX files as distributed with MNIST: a big-endian header (magic, then one
//! `u32` per dimension) followed by unsigned bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

use super::Dataset;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count × rows × cols` bytes, image-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxLabels {
    pub labels: Vec<u8>,
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Length {
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, what: &str) -> Result<()> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Format(format!(
            "{what}: magic number {magic:#010x}, expected {expected:#010x}"
        )));
    }
    Ok(())
}

fn check_body(bytes: &[u8], header: usize, body: usize) -> Result<()> {
    let expected = header + body;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after IDX payload",
            bytes.len() - expected
        )));
    }
    Ok(())
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC, "image file")?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    check_body(bytes, 16, count * rows * cols)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_labels(bytes: &[u8]) -> Result<IdxLabels> {
    check_magic(bytes, LABELS_MAGIC, "label file")?;
    let count = read_u32(bytes, 4)? as usize;
    check_body(bytes, 8, count)?;
    Ok(IdxLabels {
        labels: bytes[8..].to_vec(),
    })
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &IdxLabels) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.labels.len() as u32).to_be_bytes());
    out.extend_from_slice(&labels.labels);
    out
}

pub fn read_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_images(&bytes)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<IdxLabels> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&bytes)
}

/// Pairs an image file with its label file; pixels are scaled to `[0, 1]`.
pub fn to_dataset(images: &IdxImages, labels: &IdxLabels) -> Result<Dataset> {
    if images.count != labels.labels.len() {
        return Err(Error::Consistency(format!(
            "{} images but {} labels",
            images.count,
            labels.labels.len()
        )));
    }
    let features = Matrix::from_vec(
        images.count,
        images.pixels_per_image(),
        images.pixels.iter().map(|&p| f64::from(p) / 255.0).collect(),
    )?;
    let labels: Vec<usize> = labels.labels.iter().map(|&l| l as usize).collect();
    Dataset::new(features, labels)
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images = read_images(images_path)?;
    let labels = read_labels(labels_path)?;
    to_dataset(&images, &labels)
}
