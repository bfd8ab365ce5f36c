//! MoireDB: formula-driven Moiré interference-fringe images and a
//! PixMix-style augmentation pipeline that mixes them into training data.
//!
//! * [`moire`] renders concentric-circle brightness fields and superposes
//!   them into Moiré images from sampled parameter specs.
//! * [`pixmix`] mixes training images with mixing-set images additively or
//!   multiplicatively.
//! * [`dataset`] reads and writes mixing sets, CIFAR batches and augmented
//!   datasets.
//! * [`rng`] holds the portable random algorithms every draw goes through.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod image;
pub mod moire;
pub mod pixmix;
pub mod rng;

pub use error::{Error, Result};
pub use image::{GrayImage, RgbImage, UnitImage};
pub use moire::{
    fringe_count, generate_moire, radial_brightness, render_pattern, sample_spec, superpose,
    ConcentricPatternSpec, MoireImageSpec, ParamRanges,
};
pub use pixmix::{
    mix_additive, mix_multiplicative, pixmix_augment, sample_coefficients, ImageSource, MixConfig,
};
pub use rng::{derive_seed, SplitMix64, Xoshiro256PlusPlus};
