//! Concentric-circle brightness fields and their superposition into Moiré
//! images.
//!
//! A pattern is a radial sinusoid around a center point,
//!
//! ```text
//! g(r) = (V_M * cos(nu * pi * r) + 1) * 255 / 2
//! ```
//!
//! sampled at pixel centers `(x + 0.5, y + 0.5)` and rounded half away from
//! zero. One full brightness period spans `2 / nu` pixels. A Moiré image is
//! the pixelwise mean of `Q_n` such patterns; the interference fringes come
//! from the beat between patterns with different centers and frequencies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{quantize, GrayImage};
use crate::rng::Xoshiro256PlusPlus;

pub const DEFAULT_SIZE: usize = 512;
pub const DEFAULT_NU_MIN: f64 = 0.01;
pub const DEFAULT_NU_MAX: f64 = 0.05;
pub const DEFAULT_CENTER_MIN: f64 = 0.0;
pub const DEFAULT_CENTER_MAX: f64 = 600.0;
pub const DEFAULT_QN_CHOICES: [u32; 3] = [1, 2, 3];
pub const DEFAULT_AMPLITUDE: f64 = 1.0;

/// One concentric-circle brightness field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentricPatternSpec {
    /// Interval frequency; the brightness period is `2 / nu` pixels.
    pub nu: f64,
    pub center_x: f64,
    pub center_y: f64,
    /// Sinusoid amplitude `V_M`, in `(0, 1]`.
    pub amplitude: f64,
}

impl ConcentricPatternSpec {
    pub fn new(nu: f64, center_x: f64, center_y: f64, amplitude: f64) -> Result<Self> {
        let spec = Self {
            nu,
            center_x,
            center_y,
            amplitude,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::Invalid(format!(
                "nu must be finite and > 0, got {}",
                self.nu
            )));
        }
        if !(self.center_x.is_finite() && self.center_y.is_finite()) {
            return Err(Error::Invalid("pattern center must be finite".into()));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::Invalid(format!(
                "amplitude must lie in (0, 1], got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Full recipe for one dataset image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoireImageSpec {
    pub q_n: u32,
    pub patterns: Vec<ConcentricPatternSpec>,
    pub width: usize,
    pub height: usize,
    pub image_seed: u64,
}

impl MoireImageSpec {
    pub fn new(
        patterns: Vec<ConcentricPatternSpec>,
        width: usize,
        height: usize,
        image_seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            q_n: patterns.len() as u32,
            patterns,
            width,
            height,
            image_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Samples a spec from the stream `xoshiro256++(image_seed)`.
    pub fn from_seed(ranges: &ParamRanges, width: usize, height: usize, image_seed: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(image_seed);
        sample_spec(&mut rng, ranges, width, height, image_seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_n == 0 {
            return Err(Error::Invalid("q_n must be at least 1".into()));
        }
        if self.patterns.len() != self.q_n as usize {
            return Err(Error::Invalid(format!(
                "q_n is {} but {} patterns are listed",
                self.q_n,
                self.patterns.len()
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Invalid(format!(
                "image dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        self.patterns.iter().try_for_each(|p| p.validate())
    }
}

/// Sampling ranges for [`sample_spec`]. Defaults are the published MoireDB
/// ranges with full-contrast amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub nu_min: f64,
    pub nu_max: f64,
    pub center_min: f64,
    pub center_max: f64,
    pub q_n_choices: Vec<u32>,
    pub amplitude: f64,
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            nu_min: DEFAULT_NU_MIN,
            nu_max: DEFAULT_NU_MAX,
            center_min: DEFAULT_CENTER_MIN,
            center_max: DEFAULT_CENTER_MAX,
            q_n_choices: DEFAULT_QN_CHOICES.to_vec(),
            amplitude: DEFAULT_AMPLITUDE,
        }
    }
}

impl ParamRanges {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu_min, self.nu_max, self.center_min, self.center_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Invalid("parameter ranges must be finite".into()));
        }
        if !(self.nu_min > 0.0 && self.nu_min < self.nu_max) {
            return Err(Error::Invalid(format!(
                "need 0 < nu_min < nu_max, got [{}, {})",
                self.nu_min, self.nu_max
            )));
        }
        if self.center_min >= self.center_max {
            return Err(Error::Invalid(format!(
                "need center_min < center_max, got [{}, {})",
                self.center_min, self.center_max
            )));
        }
        if self.q_n_choices.is_empty() || self.q_n_choices.contains(&0) {
            return Err(Error::Invalid(
                "q_n choices must be a nonempty set of positive integers".into(),
            ));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::Invalid(format!(
                "amplitude must lie in (0, 1], got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Brightness of a pattern at radial distance `r`, in `[0, 255]`.
#[inline]
pub fn radial_brightness(r: f64, nu: f64, amplitude: f64) -> f64 {
    (amplitude * (nu * PI * r).cos() + 1.0) * 255.0 / 2.0
}

/// Per-pixel evaluator for one pattern; the hot loop of every renderer.
struct PatternField {
    dx2: Vec<f64>,
    dy2: Vec<f64>,
    nu: f64,
    amplitude: f64,
}

impl PatternField {
    fn new(spec: &ConcentricPatternSpec, width: usize, height: usize) -> Self {
        let sq = |offset: f64, c: f64| {
            let d = offset + 0.5 - c;
            d * d
        };
        Self {
            dx2: (0..width).map(|x| sq(x as f64, spec.center_x)).collect(),
            dy2: (0..height).map(|y| sq(y as f64, spec.center_y)).collect(),
            nu: spec.nu,
            amplitude: spec.amplitude,
        }
    }

    #[inline]
    fn value(&self, x: usize, y: usize) -> u8 {
        let r = (self.dx2[x] + self.dy2[y]).sqrt();
        quantize(radial_brightness(r, self.nu, self.amplitude))
    }
}

/// Renders a single concentric-circle pattern.
pub fn render_pattern(spec: &ConcentricPatternSpec, width: usize, height: usize) -> GrayImage {
    let field = PatternField::new(spec, width, height);
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        pixels.extend((0..width).map(|x| field.value(x, y)));
    }
    GrayImage::new(width, height, pixels).expect("buffer sized from dimensions")
}

#[inline]
fn rounded_mean(sum: u32, n: u32) -> u8 {
    // floor((2 * sum + n) / (2 * n)) == round-half-up(sum / n) for sum >= 0
    ((2 * sum + n) / (2 * n)) as u8
}

/// Pixelwise mean of equally sized images, rounded half away from zero.
pub fn superpose(patterns: &[GrayImage]) -> Result<GrayImage> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::Invalid("superpose needs at least one image".into()))?;
    let (width, height) = (first.width(), first.height());
    for (index, p) in patterns.iter().enumerate() {
        if p.width() != width || p.height() != height {
            return Err(Error::DimensionMismatch {
                index,
                width,
                height,
                actual_width: p.width(),
                actual_height: p.height(),
            });
        }
    }
    let n = patterns.len() as u32;
    let pixels = (0..width * height)
        .map(|i| {
            let sum: u32 = patterns.iter().map(|p| p.pixels()[i] as u32).sum();
            rounded_mean(sum, n)
        })
        .collect();
    GrayImage::new(width, height, pixels)
}

/// Draws a spec: `q_n` first, then `(nu, center_x, center_y)` per pattern.
pub fn sample_spec(
    rng: &mut Xoshiro256PlusPlus,
    ranges: &ParamRanges,
    width: usize,
    height: usize,
    image_seed: u64,
) -> MoireImageSpec {
    let choice = rng.below(ranges.q_n_choices.len() as u64) as usize;
    let q_n = ranges.q_n_choices[choice];
    let patterns = (0..q_n)
        .map(|_| {
            let nu = rng.uniform(ranges.nu_min, ranges.nu_max);
            let center_x = rng.uniform(ranges.center_min, ranges.center_max);
            let center_y = rng.uniform(ranges.center_min, ranges.center_max);
            ConcentricPatternSpec {
                nu,
                center_x,
                center_y,
                amplitude: ranges.amplitude,
            }
        })
        .collect();
    MoireImageSpec {
        q_n,
        patterns,
        width,
        height,
        image_seed,
    }
}

/// Renders a Moiré image. Equal to `superpose` over `render_pattern` of each
/// pattern, without materializing the intermediate images.
pub fn generate_moire(spec: &MoireImageSpec) -> GrayImage {
    let (width, height) = (spec.width, spec.height);
    let fields: Vec<_> = spec
        .patterns
        .iter()
        .map(|p| PatternField::new(p, width, height))
        .collect();
    let n = fields.len() as u32;
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        pixels.extend((0..width).map(|x| {
            let sum: u32 = fields.iter().map(|f| f.value(x, y) as u32).sum();
            rounded_mean(sum, n)
        }));
    }
    GrayImage::new(width, height, pixels).expect("buffer sized from dimensions")
}

/// Number of full brightness periods within the visible radius, at least 1.
///
/// The visible radius is the distance from the pattern center to the
/// farthest corner pixel center.
pub fn fringe_count(spec: &ConcentricPatternSpec, width: usize, height: usize) -> u32 {
    let xs = [0.5, width as f64 - 0.5];
    let ys = [0.5, height as f64 - 0.5];
    let r_max = xs
        .iter()
        .flat_map(|&x| {
            ys.iter()
                .map(move |&y| (x - spec.center_x).hypot(y - spec.center_y))
        })
        .fold(0.0, f64::max);
    ((r_max * spec.nu / 2.0).ceil() as u32).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(nu: f64, cx: f64, cy: f64) -> ConcentricPatternSpec {
        ConcentricPatternSpec::new(nu, cx, cy, 1.0).unwrap()
    }

    #[test]
    fn brightness_anchor_values() {
        assert!((radial_brightness(0.0, 0.02, 1.0) - 255.0).abs() < 1e-9);
        assert!(radial_brightness(50.0, 0.02, 1.0).abs() < 1e-9);
        assert!((radial_brightness(25.0, 0.02, 0.5) - 127.5).abs() < 1e-9);
    }

    #[test]
    fn pattern_spec_rejects_bad_values() {
        assert!(ConcentricPatternSpec::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ConcentricPatternSpec::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(ConcentricPatternSpec::new(0.02, f64::INFINITY, 1.0, 1.0).is_err());
        assert!(ConcentricPatternSpec::new(0.02, 1.0, 1.0, 0.0).is_err());
        assert!(ConcentricPatternSpec::new(0.02, 1.0, 1.0, 1.5).is_err());
        // Arbitrary positive nu outside the sampling range is fine.
        assert!(ConcentricPatternSpec::new(3.0, -40.0, 900.0, 0.3).is_ok());
    }

    #[test]
    fn image_spec_checks_pattern_count() {
        let mut spec = MoireImageSpec::new(vec![pattern(0.02, 1.0, 1.0)], 4, 4, 0).unwrap();
        spec.q_n = 2;
        assert!(spec.validate().is_err());
        assert!(MoireImageSpec::new(vec![], 4, 4, 0).is_err());
        assert!(MoireImageSpec::new(vec![pattern(0.02, 1.0, 1.0)], 0, 4, 0).is_err());
    }

    #[test]
    fn ranges_validation() {
        assert!(ParamRanges::default().validate().is_ok());
        let bad = [
            ParamRanges {
                nu_min: 0.05,
                nu_max: 0.01,
                ..Default::default()
            },
            ParamRanges {
                center_min: 600.0,
                ..Default::default()
            },
            ParamRanges {
                q_n_choices: vec![],
                ..Default::default()
            },
            ParamRanges {
                amplitude: 0.0,
                ..Default::default()
            },
        ];
        for r in bad {
            assert!(r.validate().is_err(), "{r:?}");
        }
    }

    #[test]
    fn center_pixel_and_symmetry() {
        let img = render_pattern(&pattern(0.02, 32.0, 32.0), 64, 64);
        let r = 0.5f64.sqrt();
        assert_eq!(img.get(32, 32), quantize(radial_brightness(r, 0.02, 1.0)));
        for y in 0..64 {
            for x in 0..64 {
                assert_eq!(img.get(x, y), img.get(63 - x, y));
                assert_eq!(img.get(x, y), img.get(x, 63 - y));
            }
        }
    }

    #[test]
    fn corner_pixel_of_origin_centered_pattern() {
        let img = render_pattern(&pattern(0.02, 0.0, 0.0), 64, 64);
        assert_eq!(img.get(0, 0), 255);
    }

    #[test]
    fn single_pixel_image() {
        let spec = pattern(0.037, 3.2, -1.0);
        let img = render_pattern(&spec, 1, 1);
        let r = ((0.5f64 - 3.2).powi(2) + (0.5f64 + 1.0).powi(2)).sqrt();
        assert_eq!(img.pixels(), &[quantize(radial_brightness(r, 0.037, 1.0))]);
    }

    #[test]
    fn superpose_basics() {
        let p = render_pattern(&pattern(0.03, 10.0, 5.0), 20, 12);
        assert_eq!(superpose(std::slice::from_ref(&p)).unwrap(), p);
        assert_eq!(superpose(&[p.clone(), p.clone(), p.clone()]).unwrap(), p);
        let mid = superpose(&[GrayImage::filled(3, 3, 0), GrayImage::filled(3, 3, 255)]).unwrap();
        assert!(mid.pixels().iter().all(|&v| v == 128));
    }

    #[test]
    fn superpose_names_mismatched_index() {
        let a = GrayImage::filled(4, 4, 1);
        let b = GrayImage::filled(4, 5, 1);
        match superpose(&[a.clone(), a, b]) {
            Err(Error::DimensionMismatch { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(superpose(&[]).is_err());
    }

    #[test]
    fn generate_matches_render_for_degenerate_specs() {
        let p = pattern(0.021, 40.0, 17.0);
        let single = MoireImageSpec::new(vec![p], 48, 40, 1).unwrap();
        assert_eq!(generate_moire(&single), render_pattern(&p, 48, 40));
        let twin = MoireImageSpec::new(vec![p, p], 48, 40, 1).unwrap();
        assert_eq!(generate_moire(&twin), render_pattern(&p, 48, 40));
    }

    #[test]
    fn sampling_respects_ranges_and_seed() {
        let ranges = ParamRanges::default();
        for seed in 0..500 {
            let spec = MoireImageSpec::from_seed(&ranges, 512, 512, seed);
            assert!(spec.validate().is_ok());
            assert!((1..=3).contains(&spec.q_n));
            for p in &spec.patterns {
                assert!((0.01..0.05).contains(&p.nu));
                assert!((0.0..600.0).contains(&p.center_x));
                assert!((0.0..600.0).contains(&p.center_y));
            }
        }
        let a = MoireImageSpec::from_seed(&ranges, 64, 64, 42);
        let b = MoireImageSpec::from_seed(&ranges, 64, 64, 42);
        assert_eq!(a, b);

        let single = ParamRanges {
            q_n_choices: vec![1],
            ..Default::default()
        };
        for seed in 0..100 {
            assert_eq!(
                MoireImageSpec::from_seed(&single, 8, 8, seed)
                    .patterns
                    .len(),
                1
            );
        }
    }

    #[test]
    fn fringe_counts() {
        assert_eq!(fringe_count(&pattern(0.02, 256.0, 256.0), 512, 512), 4);
        assert_eq!(fringe_count(&pattern(0.04, 0.0, 0.0), 512, 512), 15);
        assert_eq!(fringe_count(&pattern(1e-9, 10.0, 10.0), 64, 64), 1);
    }
}
