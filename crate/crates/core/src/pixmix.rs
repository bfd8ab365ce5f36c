//! PixMix-style mixing pipeline.
//!
//! An input image goes through `k ~ Uniform{0..=k_max}` mixing steps. Each
//! step picks a partner (a mixing-set image with probability
//! `p_mixer_from_set`, otherwise a training image), an operation (additive
//! with probability `p_additive`, otherwise multiplicative), and a pair of
//! coefficients `(a, b)`:
//!
//! ```text
//! additive:        out = (a (2x - 1) + b (2y - 1) + 1) / 2
//! multiplicative:  out = max(2x, eps)^a * max(2y, eps)^b / 2
//! ```
//!
//! and clamps to `[0, 1]`. Draws per step happen in a fixed order: partner
//! coin, partner index, operation coin, coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::UnitImage;
use crate::rng::Xoshiro256PlusPlus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    /// Upper bound (inclusive) on the number of mixing steps.
    pub k_max: u32,
    pub beta_shape: f64,
    pub p_mixer_from_set: f64,
    pub p_additive: f64,
    /// Floor applied in multiplicative space.
    pub epsilon: f64,
}

impl Default for MixConfig {
    fn default() -> Self {
        Self {
            k_max: 5,
            beta_shape: 3.0,
            p_mixer_from_set: 0.5,
            p_additive: 0.5,
            epsilon: 1e-3,
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_shape.is_finite() && self.beta_shape > 0.0) {
            return Err(Error::Invalid(format!(
                "beta shape must be finite and > 0, got {}",
                self.beta_shape
            )));
        }
        for (name, p) in [
            ("p_mixer_from_set", self.p_mixer_from_set),
            ("p_additive", self.p_additive),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Invalid(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Draws mixing coefficients.
///
/// With probability 1/2, `a ~ Beta(beta, 1)` and `b ~ Beta(1, beta)`;
/// otherwise `a = 1 + Beta(1, beta)` and `b = -Beta(1, beta)`.
pub fn sample_coefficients(rng: &mut Xoshiro256PlusPlus, beta_shape: f64) -> (f64, f64) {
    if rng.coin(0.5) {
        let a = rng.beta(beta_shape, 1.0);
        let b = rng.beta(1.0, beta_shape);
        (a, b)
    } else {
        let a = 1.0 + rng.beta(1.0, beta_shape);
        let b = -rng.beta(1.0, beta_shape);
        (a, b)
    }
}

fn mix_with(
    base: &UnitImage,
    mixer: &UnitImage,
    op: impl Fn(f64, f64) -> f64,
) -> Result<UnitImage> {
    if base.width() != mixer.width() || base.height() != mixer.height() {
        return Err(Error::DimensionMismatch {
            index: 1,
            width: base.width(),
            height: base.height(),
            actual_width: mixer.width(),
            actual_height: mixer.height(),
        });
    }
    let channels = base.channels();
    let values = match mixer.channels() {
        c if c == channels => base
            .values()
            .iter()
            .zip(mixer.values())
            .map(|(&x, &y)| op(x, y).clamp(0.0, 1.0))
            .collect(),
        1 => base
            .values()
            .chunks_exact(channels)
            .zip(mixer.values())
            .flat_map(|(px, &y)| px.iter().map(move |&x| (x, y)))
            .map(|(x, y)| op(x, y).clamp(0.0, 1.0))
            .collect(),
        c => {
            return Err(Error::Invalid(format!(
                "cannot mix a {c}-channel image into a {channels}-channel base"
            )))
        }
    };
    Ok(UnitImage::from_raw(
        base.width(),
        base.height(),
        channels,
        values,
    ))
}

/// Additive mixing in centered `[-1, 1]` space. A single-channel mixer is
/// broadcast across the base's channels.
pub fn mix_additive(base: &UnitImage, mixer: &UnitImage, a: f64, b: f64) -> Result<UnitImage> {
    mix_with(base, mixer, |x, y| {
        (a * (2.0 * x - 1.0) + b * (2.0 * y - 1.0) + 1.0) / 2.0
    })
}

/// Multiplicative mixing in `[epsilon, 2]` space.
pub fn mix_multiplicative(
    base: &UnitImage,
    mixer: &UnitImage,
    a: f64,
    b: f64,
    epsilon: f64,
) -> Result<UnitImage> {
    mix_with(base, mixer, |x, y| {
        (2.0 * x).max(epsilon).powf(a) * (2.0 * y).max(epsilon).powf(b) / 2.0
    })
}

/// A read-only, indexable collection of mixing partners.
pub trait ImageSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Image `index`, resized to `width` x `height` if needed.
    fn image(&self, index: usize, width: usize, height: usize) -> Result<UnitImage>;
}

impl ImageSource for [UnitImage] {
    fn len(&self) -> usize {
        <[UnitImage]>::len(self)
    }

    fn image(&self, index: usize, width: usize, height: usize) -> Result<UnitImage> {
        let img = &self[index];
        if img.width() != width || img.height() != height {
            return Err(Error::DimensionMismatch {
                index,
                width,
                height,
                actual_width: img.width(),
                actual_height: img.height(),
            });
        }
        Ok(img.clone())
    }
}

impl ImageSource for Vec<UnitImage> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn image(&self, index: usize, width: usize, height: usize) -> Result<UnitImage> {
        self.as_slice().image(index, width, height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partner {
    MixingSet(usize),
    Training(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixOp {
    Additive,
    Multiplicative,
}

/// Record of one applied mixing step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixStep {
    pub partner: Partner,
    pub op: MixOp,
    pub a: f64,
    pub b: f64,
}

/// Runs the mixing pipeline on `input`.
pub fn pixmix_augment<T, M>(
    input: &UnitImage,
    train: &T,
    mixing_set: &M,
    rng: &mut Xoshiro256PlusPlus,
    config: &MixConfig,
) -> Result<UnitImage>
where
    T: ImageSource + ?Sized,
    M: ImageSource + ?Sized,
{
    pixmix_augment_traced(input, train, mixing_set, rng, config).map(|(img, _)| img)
}

/// Like [`pixmix_augment`], also returning the steps that were applied.
pub fn pixmix_augment_traced<T, M>(
    input: &UnitImage,
    train: &T,
    mixing_set: &M,
    rng: &mut Xoshiro256PlusPlus,
    config: &MixConfig,
) -> Result<(UnitImage, Vec<MixStep>)>
where
    T: ImageSource + ?Sized,
    M: ImageSource + ?Sized,
{
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptySource("training set"));
    }
    if mixing_set.is_empty() {
        return Err(Error::EmptySource("mixing set"));
    }
    let (width, height) = (input.width(), input.height());
    let k = rng.below(config.k_max as u64 + 1) as usize;
    let mut mixed = input.clone();
    let mut steps = Vec::with_capacity(k);
    for _ in 0..k {
        let (partner, mixer) = if rng.coin(config.p_mixer_from_set) {
            let i = rng.below(mixing_set.len() as u64) as usize;
            (Partner::MixingSet(i), mixing_set.image(i, width, height)?)
        } else {
            let i = rng.below(train.len() as u64) as usize;
            (Partner::Training(i), train.image(i, width, height)?)
        };
        let op = if rng.coin(config.p_additive) {
            MixOp::Additive
        } else {
            MixOp::Multiplicative
        };
        let (a, b) = sample_coefficients(rng, config.beta_shape);
        mixed = match op {
            MixOp::Additive => mix_additive(&mixed, &mixer, a, b)?,
            MixOp::Multiplicative => mix_multiplicative(&mixed, &mixer, a, b, config.epsilon)?,
        };
        steps.push(MixStep { partner, op, a, b });
    }
    Ok((mixed, steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(width: usize, height: usize, channels: usize) -> UnitImage {
        let n = width * height * channels;
        let values = (0..n).map(|i| (i % 256) as f64 / 255.0).collect();
        UnitImage::new(width, height, channels, values).unwrap()
    }

    fn assert_close(a: &UnitImage, b: &UnitImage, tol: f64) {
        assert_eq!(a.channels(), b.channels());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn coefficient_branches() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let (mut first, mut second) = (0, 0);
        for _ in 0..2000 {
            let (a, b) = sample_coefficients(&mut rng, 3.0);
            if a <= 1.0 {
                assert!((0.0..=1.0).contains(&a) && (0.0..1.0).contains(&b));
                first += 1;
            } else {
                assert!(a < 2.0 && b > -1.0 && b <= 0.0);
                second += 1;
            }
        }
        assert!(first > 800 && second > 800);
    }

    #[test]
    fn coefficients_deterministic() {
        let mut r1 = Xoshiro256PlusPlus::seed_from_u64(77);
        let mut r2 = Xoshiro256PlusPlus::seed_from_u64(77);
        for _ in 0..50 {
            assert_eq!(
                sample_coefficients(&mut r1, 3.0),
                sample_coefficients(&mut r2, 3.0)
            );
        }
    }

    #[test]
    fn additive_identities() {
        let base = ramp(8, 8, 3);
        let mixer = ramp(8, 8, 1);
        assert_close(
            &mix_additive(&base, &mixer, 1.0, 0.0).unwrap(),
            &base,
            1e-12,
        );
        let out = mix_additive(&base, &mixer, 0.0, 1.0).unwrap();
        let expected: Vec<f64> = mixer.values().iter().flat_map(|&v| [v; 3]).collect();
        assert_close(&out, &UnitImage::new(8, 8, 3, expected).unwrap(), 1e-12);
        let half = UnitImage::filled(4, 4, 3, 0.5);
        for (a, b) in [(0.3, 0.9), (1.7, -0.4)] {
            let out = mix_additive(&half, &UnitImage::filled(4, 4, 1, 0.5), a, b).unwrap();
            assert!(out.values().iter().all(|&v| v == 0.5));
        }
    }

    #[test]
    fn multiplicative_values() {
        let base = ramp(8, 8, 3);
        let out = mix_multiplicative(&base, &ramp(8, 8, 3), 1.0, 0.0, 1e-3).unwrap();
        // Exact zeros are lifted to epsilon / 2.
        for (o, b) in out.values().iter().zip(base.values()) {
            assert!((o - b.max(5e-4)).abs() < 1e-12);
        }
        let half = UnitImage::filled(4, 4, 3, 0.5);
        let out = mix_multiplicative(&half, &UnitImage::filled(4, 4, 3, 0.5), 1.3, -0.6, 1e-3);
        assert!(out.unwrap().values().iter().all(|&v| v == 0.5));
        let out = mix_multiplicative(&half, &UnitImage::filled(4, 4, 1, 1.0), 0.5, 0.5, 1e-3);
        for v in out.unwrap().values() {
            assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn mix_rejects_mismatched_inputs() {
        let base = ramp(4, 4, 3);
        assert!(mix_additive(&base, &ramp(4, 5, 1), 1.0, 0.0).is_err());
        assert!(mix_multiplicative(&ramp(4, 4, 1), &base, 1.0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn zero_steps_is_identity() {
        let input = ramp(6, 6, 3);
        let train = vec![ramp(6, 6, 3)];
        let moire = vec![UnitImage::filled(6, 6, 1, 0.2)];
        let config = MixConfig {
            k_max: 0,
            ..Default::default()
        };
        for seed in 0..20 {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
            let out = pixmix_augment(&input, &train, &moire, &mut rng, &config).unwrap();
            assert_eq!(out, input);
        }
    }

    #[test]
    fn pipeline_is_deterministic_and_bounded() {
        let input = ramp(6, 6, 3);
        let train = vec![ramp(6, 6, 3), UnitImage::filled(6, 6, 3, 0.9)];
        let moire = vec![UnitImage::filled(6, 6, 1, 0.2), ramp(6, 6, 1)];
        let config = MixConfig::default();
        for seed in 0..200 {
            let mut r1 = Xoshiro256PlusPlus::seed_from_u64(seed);
            let mut r2 = Xoshiro256PlusPlus::seed_from_u64(seed);
            let (a, steps) =
                pixmix_augment_traced(&input, &train, &moire, &mut r1, &config).unwrap();
            let b = pixmix_augment(&input, &train, &moire, &mut r2, &config).unwrap();
            assert_eq!(a, b);
            assert!(steps.len() <= 5);
            assert!(a.values().iter().all(|v| (0.0..=1.0).contains(v)));
            if steps.is_empty() {
                assert_eq!(a, input);
            }
        }
    }

    #[test]
    fn empty_sources_are_errors() {
        let input = ramp(2, 2, 3);
        let empty: Vec<UnitImage> = vec![];
        let some = vec![UnitImage::filled(2, 2, 1, 0.5)];
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0);
        let cfg = MixConfig::default();
        assert!(matches!(
            pixmix_augment(&input, &empty, &some, &mut rng, &cfg),
            Err(Error::EmptySource(_))
        ));
        assert!(matches!(
            pixmix_augment(&input, &some, &empty, &mut rng, &cfg),
            Err(Error::EmptySource(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(MixConfig::default().validate().is_ok());
        let bad = [
            MixConfig {
                beta_shape: 0.0,
                ..Default::default()
            },
            MixConfig {
                p_additive: 1.5,
                ..Default::default()
            },
            MixConfig {
                p_mixer_from_set: -0.1,
                ..Default::default()
            },
            MixConfig {
                epsilon: 0.0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }
}
