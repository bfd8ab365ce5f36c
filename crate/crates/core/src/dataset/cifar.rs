//! CIFAR binary batches.
//!
//! CIFAR-10 records are 1 label byte followed by 3072 image bytes; CIFAR-100
//! records carry a coarse and a fine label byte (the coarse one is skipped).
//! Image bytes are channel-planar: 1024 red, then green, then blue, each in
//! row-major 32x32 order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{RgbImage, UnitImage};
use crate::pixmix::ImageSource;

pub const SIDE: usize = 32;
const PLANE: usize = SIDE * SIDE;
const IMAGE_BYTES: usize = 3 * PLANE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImage {
    pub image: RgbImage,
    pub label: u16,
}

fn label_bytes(class_count: u16) -> Result<usize> {
    match class_count {
        10 => Ok(1),
        100 => Ok(2),
        n => Err(Error::Invalid(format!(
            "class count must be 10 or 100, got {n}"
        ))),
    }
}

pub fn record_size(class_count: u16) -> Result<usize> {
    Ok(label_bytes(class_count)? + IMAGE_BYTES)
}

pub fn parse_cifar_batch(bytes: &[u8], class_count: u16, path: &Path) -> Result<Vec<LabeledImage>> {
    let labels = label_bytes(class_count)?;
    let size = labels + IMAGE_BYTES;
    if !bytes.len().is_multiple_of(size) {
        return Err(Error::format(
            path,
            format!(
                "{} bytes is not a whole number of {size}-byte CIFAR-{class_count} records",
                bytes.len()
            ),
        ));
    }
    bytes
        .chunks_exact(size)
        .enumerate()
        .map(|(i, record)| {
            let label = record[labels - 1] as u16;
            if label >= class_count {
                return Err(Error::format(
                    path,
                    format!("record {i} has label {label}, expected < {class_count}"),
                ));
            }
            let planes = &record[labels..];
            let (r, rest) = planes.split_at(PLANE);
            let (g, b) = rest.split_at(PLANE);
            let pixels = r
                .iter()
                .zip(g)
                .zip(b)
                .flat_map(|((&r, &g), &b)| [r, g, b])
                .collect();
            Ok(LabeledImage {
                image: RgbImage::new(SIDE, SIDE, pixels)?,
                label,
            })
        })
        .collect()
}

pub fn read_cifar_batch(path: &Path, class_count: u16) -> Result<Vec<LabeledImage>> {
    label_bytes(class_count)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_cifar_batch(&bytes, class_count, path)
}

/// Encodes records in the CIFAR binary layout. For CIFAR-100 the coarse
/// label byte is written as 0.
pub fn encode_cifar_batch(records: &[LabeledImage], class_count: u16) -> Result<Vec<u8>> {
    let labels = label_bytes(class_count)?;
    let mut out = Vec::with_capacity(records.len() * (labels + IMAGE_BYTES));
    for (i, rec) in records.iter().enumerate() {
        if rec.image.width() != SIDE || rec.image.height() != SIDE {
            return Err(Error::Invalid(format!("record {i} is not 32x32")));
        }
        if rec.label >= class_count {
            return Err(Error::Invalid(format!(
                "record {i} label {} out of range",
                rec.label
            )));
        }
        if labels == 2 {
            out.push(0);
        }
        out.push(rec.label as u8);
        for c in 0..3 {
            out.extend(rec.image.pixels().iter().skip(c).step_by(3));
        }
    }
    Ok(out)
}

pub fn write_cifar_batch(path: &Path, records: &[LabeledImage], class_count: u16) -> Result<()> {
    let bytes = encode_cifar_batch(records, class_count)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Training images as mixing partners. All records must already have the
/// requested size.
impl ImageSource for [LabeledImage] {
    fn len(&self) -> usize {
        <[LabeledImage]>::len(self)
    }

    fn image(&self, index: usize, width: usize, height: usize) -> Result<UnitImage> {
        let img = &self[index].image;
        if img.width() != width || img.height() != height {
            return Err(Error::DimensionMismatch {
                index,
                width,
                height,
                actual_width: img.width(),
                actual_height: img.height(),
            });
        }
        Ok(UnitImage::from_rgb(img))
    }
}
