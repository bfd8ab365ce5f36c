//! Dense pixel buffers.

use crate::error::{Error, Result};

/// Rounds half away from zero and saturates to the 8-bit range.
#[inline]
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_buffer(width, height, 1, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Nearest-neighbor resize: destination `(x, y)` reads source
    /// `(floor(x * src_w / dst_w), floor(y * src_h / dst_h))`.
    pub fn resize_nearest(&self, width: usize, height: usize) -> GrayImage {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            let sy = y * self.height / height;
            let row = &self.pixels[sy * self.width..(sy + 1) * self.width];
            pixels.extend((0..width).map(|x| row[x * self.width / width]));
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }
}

/// 8-bit RGB image, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_buffer(width, height, 3, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Real-valued working image for mixing arithmetic, values in `[0, 1]`.
///
/// `channels` is 1 or 3; samples are interleaved like [`RgbImage`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitImage {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<f64>,
}

impl UnitImage {
    pub fn new(width: usize, height: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Invalid(format!(
                "unit image must have 1 or 3 channels, got {channels}"
            )));
        }
        check_buffer(width, height, channels, values.len())?;
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!(
                "unit image value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(channels == 1 || channels == 3);
        assert!((0.0..=1.0).contains(&value));
        Self {
            width,
            height,
            channels,
            values: vec![value; width * height * channels],
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            values,
        }
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        Self::from_raw(img.width, img.height, 1, to_unit(&img.pixels))
    }

    pub fn from_rgb(img: &RgbImage) -> Self {
        Self::from_raw(img.width, img.height, 3, to_unit(&img.pixels))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Quantizes to 8-bit RGB; a single-channel image is replicated.
    pub fn to_rgb(&self) -> RgbImage {
        let pixels = match self.channels {
            3 => self.values.iter().map(|&v| quantize(v * 255.0)).collect(),
            _ => self
                .values
                .iter()
                .flat_map(|&v| [quantize(v * 255.0); 3])
                .collect(),
        };
        RgbImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Quantizes to 8-bit gray. Only valid for single-channel images.
    pub fn to_gray(&self) -> Result<GrayImage> {
        if self.channels != 1 {
            return Err(Error::Invalid(
                "to_gray needs a single-channel image".into(),
            ));
        }
        Ok(GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.values.iter().map(|&v| quantize(v * 255.0)).collect(),
        })
    }
}

fn to_unit(bytes: &[u8]) -> Vec<f64> {
    bytes.iter().map(|&b| b as f64 / 255.0).collect()
}

fn check_buffer(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Invalid(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::Invalid(format!(
            "buffer of {len} values does not match {width}x{height}x{channels} = {expected}"
        )));
    }
    Ok(())
}
