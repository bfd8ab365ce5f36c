//! PNG encode/decode with fixed settings so output bytes are reproducible.

use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};

/// A decoded 8-bit PNG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Gray(GrayImage),
    Rgb(RgbImage),
}

fn encode(width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Fast);
        encoder.set_filter(png::Filter::Adaptive);
        let mut writer = encoder
            .write_header()
            .expect("writing to a Vec cannot fail");
        writer
            .write_image_data(data)
            .expect("buffer length matches header");
    }
    out
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    encode(
        img.width(),
        img.height(),
        png::ColorType::Grayscale,
        img.pixels(),
    )
}

pub fn encode_rgb(img: &RgbImage) -> Vec<u8> {
    encode(img.width(), img.height(), png::ColorType::Rgb, img.pixels())
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Decoded> {
    let err = |e: png::DecodingError| Error::format(path, format!("PNG decode failed: {e}"));
    let mut reader = png::Decoder::new(Cursor::new(bytes))
        .read_info()
        .map_err(err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "PNG too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(err)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(path, "only 8-bit PNGs are supported"));
    }
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    match info.color_type {
        png::ColorType::Grayscale => Ok(Decoded::Gray(GrayImage::new(w, h, buf)?)),
        png::ColorType::Rgb => Ok(Decoded::Rgb(RgbImage::new(w, h, buf)?)),
        other => Err(Error::format(
            path,
            format!("unsupported color type {other:?}"),
        )),
    }
}

pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match decode(&bytes, path)? {
        Decoded::Gray(img) => Ok(img),
        Decoded::Rgb(_) => Err(Error::format(path, "expected a grayscale PNG")),
    }
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match decode(&bytes, path)? {
        Decoded::Rgb(img) => Ok(img),
        Decoded::Gray(_) => Err(Error::format(path, "expected an RGB PNG")),
    }
}

pub fn write_gray(path: &Path, img: &GrayImage) -> Result<()> {
    std::fs::write(path, encode_gray(img)).map_err(|e| Error::io(path, e))
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    std::fs::write(path, encode_rgb(img)).map_err(|e| Error::io(path, e))
}
