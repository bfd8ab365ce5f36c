//! Moiré mixing sets: a directory of `moire_{index:06}.png` grayscale images
//! plus a `manifest.json` recording every image's seed, spec and pixel hash.
//!
//! The manifest is written last, so a directory without one is an incomplete
//! build.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{codec, fnv1a64, format_hash, parse_hash, to_sorted_json, write_atomic};
use crate::error::{Error, Result};
use crate::image::{GrayImage, UnitImage};
use crate::moire::{generate_moire, MoireImageSpec, ParamRanges, DEFAULT_SIZE};
use crate::pixmix::ImageSource;
use crate::rng::derive_seed;

/// Size of the published mixing set.
pub const DEFAULT_COUNT: usize = 14_230;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

pub fn image_file_name(index: usize) -> String {
    format!("moire_{index:06}.png")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub image_seed: u64,
    pub spec: MoireImageSpec,
    /// FNV-1a 64 of the raw pixel bytes, as 16 lowercase hex digits.
    pub content_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub param_ranges: ParamRanges,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Canonical bytes of `manifest.json`.
    pub fn to_json(&self) -> Vec<u8> {
        to_sorted_json(self)
    }

    /// Hash identifying the whole dataset (FNV-1a of the manifest bytes).
    pub fn dataset_hash(&self) -> u64 {
        fnv1a64(&self.to_json())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingManifest(dir.to_path_buf()))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        let manifest: Self = serde_json::from_slice(&bytes)
            .map_err(|e| Error::format(&path, format!("bad manifest: {e}")))?;
        manifest.check_structure(&path)?;
        Ok(manifest)
    }

    fn check_structure(&self, path: &Path) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported format version {}", self.format_version),
            ));
        }
        if self.entries.len() != self.count {
            return Err(Error::format(
                path,
                format!(
                    "count is {} but {} entries are listed",
                    self.count,
                    self.entries.len()
                ),
            ));
        }
        for (i, entry) in self.entries.iter().enumerate() {
            let fail = |message: String| Error::Manifest { index: i, message };
            if entry.index != i {
                return Err(fail(format!("index field is {}", entry.index)));
            }
            if entry.spec.image_seed != entry.image_seed {
                return Err(fail("spec seed differs from entry seed".into()));
            }
            if entry.spec.width != self.width || entry.spec.height != self.height {
                return Err(fail(format!(
                    "spec is {}x{}, dataset is {}x{}",
                    entry.spec.width, entry.spec.height, self.width, self.height
                )));
            }
            entry.spec.validate().map_err(|e| fail(e.to_string()))?;
            if parse_hash(&entry.content_hash).is_none() {
                return Err(fail(format!(
                    "malformed content hash {:?}",
                    entry.content_hash
                )));
            }
        }
        Ok(())
    }
}

/// Inputs that fully determine a mixing set.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSetParams {
    pub master_seed: u64,
    pub count: usize,
    pub ranges: ParamRanges,
    pub width: usize,
    pub height: usize,
}

impl Default for MixingSetParams {
    fn default() -> Self {
        Self {
            master_seed: 0,
            count: DEFAULT_COUNT,
            ranges: ParamRanges::default(),
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
        }
    }
}

impl MixingSetParams {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Invalid("count must be at least 1".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Invalid("image size must be positive".into()));
        }
        self.ranges.validate()
    }

    /// Spec of image `index`, re-derived from the master seed.
    pub fn spec(&self, index: usize) -> MoireImageSpec {
        let seed = derive_seed(self.master_seed, index as u64);
        MoireImageSpec::from_seed(&self.ranges, self.width, self.height, seed)
    }
}

/// Generates the mixing set into `out_dir` using the current rayon pool.
///
/// Output bytes do not depend on the number of worker threads.
pub fn build_mixing_set(params: &MixingSetParams, out_dir: &Path) -> Result<DatasetManifest> {
    params.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    match std::fs::remove_file(&manifest_path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(manifest_path, e)),
    }

    let entries = (0..params.count)
        .into_par_iter()
        .map(|index| {
            let spec = params.spec(index);
            let image = generate_moire(&spec);
            codec::write_gray(&out_dir.join(image_file_name(index)), &image)?;
            Ok(ManifestEntry {
                index,
                image_seed: spec.image_seed,
                content_hash: format_hash(fnv1a64(image.pixels())),
                spec,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        master_seed: params.master_seed,
        count: params.count,
        width: params.width,
        height: params.height,
        param_ranges: params.ranges.clone(),
        entries,
    };
    write_atomic(&manifest_path, &manifest.to_json())?;
    Ok(manifest)
}

/// A loaded, hash-verified mixing set.
#[derive(Debug, Clone)]
pub struct MixingSet {
    manifest: DatasetManifest,
    images: Vec<GrayImage>,
    /// Whether `images` hold the original resolution.
    full_resolution: bool,
}

impl MixingSet {
    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    pub fn get(&self, index: usize) -> Option<&GrayImage> {
        self.images.get(index)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

impl ImageSource for MixingSet {
    fn len(&self) -> usize {
        self.images.len()
    }

    fn image(&self, index: usize, width: usize, height: usize) -> Result<UnitImage> {
        let img = &self.images[index];
        if img.width() == width && img.height() == height {
            return Ok(UnitImage::from_gray(img));
        }
        if !self.full_resolution {
            return Err(Error::Invalid(format!(
                "mixing set was loaded at {}x{}, cannot serve {width}x{height}",
                img.width(),
                img.height()
            )));
        }
        Ok(UnitImage::from_gray(&img.resize_nearest(width, height)))
    }
}

fn load_entry(dir: &Path, entry: &ManifestEntry) -> Result<GrayImage> {
    let path = dir.join(image_file_name(entry.index));
    let img = codec::read_gray(&path)?;
    if img.width() != entry.spec.width || img.height() != entry.spec.height {
        return Err(Error::Manifest {
            index: entry.index,
            message: format!(
                "{} is {}x{}, manifest says {}x{}",
                path.display(),
                img.width(),
                img.height(),
                entry.spec.width,
                entry.spec.height
            ),
        });
    }
    let expected = parse_hash(&entry.content_hash).expect("checked when the manifest was read");
    let actual = fnv1a64(img.pixels());
    if actual != expected {
        return Err(Error::HashMismatch {
            index: entry.index,
            expected,
            actual,
        });
    }
    Ok(img)
}

/// Loads every image and checks it against the manifest.
pub fn load_mixing_set(dir: &Path) -> Result<MixingSet> {
    load_mixing_set_impl(dir, None)
}

/// Like [`load_mixing_set`] but keeps only nearest-neighbor downscaled copies,
/// which bounds memory when the set is only used at one training resolution.
pub fn load_mixing_set_resized(dir: &Path, width: usize, height: usize) -> Result<MixingSet> {
    load_mixing_set_impl(dir, Some((width, height)))
}

fn load_mixing_set_impl(dir: &Path, target: Option<(usize, usize)>) -> Result<MixingSet> {
    let manifest = DatasetManifest::read(dir)?;
    let images = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let img = load_entry(dir, entry)?;
            Ok(match target {
                Some((w, h)) => img.resize_nearest(w, h),
                None => img,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let full_resolution = target.is_none_or(|(w, h)| w == manifest.width && h == manifest.height);
    Ok(MixingSet {
        manifest,
        images,
        full_resolution,
    })
}

/// One entry that failed [`verify_mixing_set`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub index: usize,
    pub reason: String,
}

/// Re-derives every entry from the master seed and ranges, regenerates its
/// image and compares hashes against both the manifest and the stored file.
///
/// Returns the list of failing entries (empty when the set is intact); only
/// a missing or unreadable manifest is an `Err`.
pub fn verify_mixing_set(dir: &Path) -> Result<(DatasetManifest, Vec<VerifyFailure>)> {
    let manifest = DatasetManifest::read(dir)?;
    let params = MixingSetParams {
        master_seed: manifest.master_seed,
        count: manifest.count,
        ranges: manifest.param_ranges.clone(),
        width: manifest.width,
        height: manifest.height,
    };
    let mut failures: Vec<VerifyFailure> = manifest
        .entries
        .par_iter()
        .filter_map(|entry| {
            verify_entry(dir, &params, entry)
                .err()
                .map(|reason| VerifyFailure {
                    index: entry.index,
                    reason,
                })
        })
        .collect();
    failures.sort_by_key(|f| f.index);
    Ok((manifest, failures))
}

fn verify_entry(
    dir: &Path,
    params: &MixingSetParams,
    entry: &ManifestEntry,
) -> std::result::Result<(), String> {
    let derived = params.spec(entry.index);
    if derived != entry.spec {
        return Err("manifest spec does not match the spec re-derived from the master seed".into());
    }
    let expected = parse_hash(&entry.content_hash).expect("checked when the manifest was read");
    let regenerated = fnv1a64(generate_moire(&entry.spec).pixels());
    if regenerated != expected {
        return Err(format!(
            "regenerated hash {} differs from manifest {}",
            format_hash(regenerated),
            entry.content_hash
        ));
    }
    let path: PathBuf = dir.join(image_file_name(entry.index));
    let stored = codec::read_gray(&path).map_err(|e| e.to_string())?;
    let stored_hash = fnv1a64(stored.pixels());
    if stored_hash != expected {
        return Err(format!(
            "{} has hash {}, manifest says {}",
            path.display(),
            format_hash(stored_hash),
            entry.content_hash
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(count: usize, seed: u64) -> MixingSetParams {
        MixingSetParams {
            master_seed: seed,
            count,
            width: 24,
            height: 16,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_match_published_dataset() {
        let p = MixingSetParams::default();
        assert_eq!((p.count, p.width, p.height), (14_230, 512, 512));
        assert_eq!(p.ranges, ParamRanges::default());
    }

    #[test]
    fn single_image_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = build_mixing_set(&small(1, 3), dir.path()).unwrap();
        assert_eq!(manifest.entries.len(), 1);
        let set = load_mixing_set(dir.path()).unwrap();
        assert_eq!(set.manifest(), &manifest);
        assert_eq!(
            set.get(0).unwrap(),
            &generate_moire(&manifest.entries[0].spec)
        );
        assert_eq!(DatasetManifest::read(dir.path()).unwrap(), manifest);
    }

    #[test]
    fn zero_count_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(build_mixing_set(&small(0, 1), dir.path()).is_err());
    }

    #[test]
    fn empty_dir_reports_missing_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_mixing_set(dir.path()),
            Err(Error::MissingManifest(_))
        ));
        assert!(matches!(
            verify_mixing_set(dir.path()),
            Err(Error::MissingManifest(_))
        ));
    }

    #[test]
    fn tampered_pixel_detected() {
        let dir = tempfile::tempdir().unwrap();
        build_mixing_set(&small(3, 9), dir.path()).unwrap();
        let path = dir.path().join(image_file_name(1));
        let img = codec::read_gray(&path).unwrap();
        let mut px = img.clone().into_pixels();
        px[5] ^= 0x01;
        codec::write_gray(
            &path,
            &GrayImage::new(img.width(), img.height(), px).unwrap(),
        )
        .unwrap();

        match load_mixing_set(dir.path()) {
            Err(Error::HashMismatch { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let (_, failures) = verify_mixing_set(dir.path()).unwrap();
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].index, 1);
    }

    #[test]
    fn missing_image_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        build_mixing_set(&small(2, 9), dir.path()).unwrap();
        std::fs::remove_file(dir.path().join(image_file_name(0))).unwrap();
        assert!(matches!(load_mixing_set(dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn resized_load_serves_requested_size() {
        let dir = tempfile::tempdir().unwrap();
        build_mixing_set(&small(2, 4), dir.path()).unwrap();
        let full = load_mixing_set(dir.path()).unwrap();
        let small_set = load_mixing_set_resized(dir.path(), 8, 8).unwrap();
        for i in 0..2 {
            assert_eq!(
                small_set.image(i, 8, 8).unwrap(),
                full.image(i, 8, 8).unwrap()
            );
        }
        assert!(small_set.image(0, 4, 4).is_err());
    }

    #[test]
    fn verify_passes_on_fresh_set() {
        let dir = tempfile::tempdir().unwrap();
        build_mixing_set(&small(4, 21), dir.path()).unwrap();
        let (manifest, failures) = verify_mixing_set(dir.path()).unwrap();
        assert_eq!(manifest.count, 4);
        assert!(failures.is_empty(), "{failures:?}");
    }
}
