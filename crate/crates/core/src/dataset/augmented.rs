//! Augmented datasets: `header.json` (provenance), `labels.txt` (one label
//! per line) and `img_{index:06}.png` RGB images.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cifar::LabeledImage;
use super::{codec, to_sorted_json, write_atomic};
use crate::error::{Error, Result};
use crate::image::UnitImage;
use crate::pixmix::{pixmix_augment, ImageSource, MixConfig};
use crate::rng::{derive_seed, Xoshiro256PlusPlus};

pub const HEADER_FILE: &str = "header.json";
pub const LABELS_FILE: &str = "labels.txt";
pub const FORMAT_VERSION: u32 = 1;

pub fn image_file_name(index: usize) -> String {
    format!("img_{index:06}.png")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedHeader {
    pub format_version: u32,
    pub seed: u64,
    pub count: usize,
    pub mix_config: MixConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSummary {
    pub count: usize,
    pub header: AugmentedHeader,
}

/// Augments every record once. Record `i` uses the stream
/// `xoshiro256++(derive_seed(seed, i))`, so the result is independent of
/// scheduling. The records themselves serve as the training-set partners.
pub fn augment_records<M: ImageSource + ?Sized>(
    records: &[LabeledImage],
    mixing_set: &M,
    seed: u64,
    config: &MixConfig,
) -> Result<Vec<LabeledImage>> {
    config.validate()?;
    records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(derive_seed(seed, i as u64));
            let input = UnitImage::from_rgb(&rec.image);
            let out = pixmix_augment(&input, records, mixing_set, &mut rng, config)?;
            Ok(LabeledImage {
                image: out.to_rgb(),
                label: rec.label,
            })
        })
        .collect()
}

/// Writes already-augmented records with a provenance header recording the
/// seed and mixing configuration. An empty input produces only the header.
pub fn write_augmented_dataset(
    records: &[LabeledImage],
    out_dir: &Path,
    seed: u64,
    config: &MixConfig,
) -> Result<AugmentedSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let header = AugmentedHeader {
        format_version: FORMAT_VERSION,
        seed,
        count: records.len(),
        mix_config: config.clone(),
    };
    if !records.is_empty() {
        records.par_iter().enumerate().try_for_each(|(i, rec)| {
            codec::write_rgb(&out_dir.join(image_file_name(i)), &rec.image)
        })?;
        let labels: String = records.iter().map(|r| format!("{}\n", r.label)).collect();
        let path = out_dir.join(LABELS_FILE);
        std::fs::write(&path, labels).map_err(|e| Error::io(path, e))?;
    }
    write_atomic(&out_dir.join(HEADER_FILE), &to_sorted_json(&header))?;
    Ok(AugmentedSummary {
        count: records.len(),
        header,
    })
}

pub fn read_augmented_dataset(dir: &Path) -> Result<(AugmentedHeader, Vec<LabeledImage>)> {
    let header_path = dir.join(HEADER_FILE);
    let bytes = std::fs::read(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header: AugmentedHeader = serde_json::from_slice(&bytes)
        .map_err(|e| Error::format(&header_path, format!("bad header: {e}")))?;
    if header.count == 0 {
        return Ok((header, Vec::new()));
    }
    let labels_path = dir.join(LABELS_FILE);
    let text = std::fs::read_to_string(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
    let labels = text
        .lines()
        .map(|l| l.trim().parse::<u16>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(&labels_path, e.to_string()))?;
    if labels.len() != header.count {
        return Err(Error::format(
            &labels_path,
            format!("{} labels for {} images", labels.len(), header.count),
        ));
    }
    let records = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            Ok(LabeledImage {
                image: codec::read_rgb(&dir.join(image_file_name(i)))?,
                label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RgbImage;

    fn record(v: u8, label: u16) -> LabeledImage {
        LabeledImage {
            image: RgbImage::new(4, 4, vec![v; 48]).unwrap(),
            label,
        }
    }

    #[test]
    fn empty_input_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let summary = write_augmented_dataset(&[], dir.path(), 5, &MixConfig::default()).unwrap();
        assert_eq!(summary.count, 0);
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names, vec![HEADER_FILE.to_string()]);
        let (header, recs) = read_augmented_dataset(dir.path()).unwrap();
        assert_eq!(header.seed, 5);
        assert!(recs.is_empty());
    }

    #[test]
    fn one_record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![record(40, 3)];
        write_augmented_dataset(&recs, dir.path(), 1, &MixConfig::default()).unwrap();
        assert_eq!(
            std::fs::read_to_string(dir.path().join(LABELS_FILE)).unwrap(),
            "3\n"
        );
        let (header, back) = read_augmented_dataset(dir.path()).unwrap();
        assert_eq!(header.count, 1);
        assert_eq!(header.mix_config, MixConfig::default());
        assert_eq!(back, recs);
    }

    #[test]
    fn augmentation_is_reproducible() {
        let recs = vec![record(10, 0), record(200, 1), record(90, 2)];
        let moire = vec![UnitImage::filled(4, 4, 1, 0.3)];
        let cfg = MixConfig::default();
        let a = augment_records(&recs, &moire, 17, &cfg).unwrap();
        let b = augment_records(&recs, &moire, 17, &cfg).unwrap();
        assert_eq!(a, b);
        let labels: Vec<_> = a.iter().map(|r| r.label).collect();
        assert_eq!(labels, vec![0, 1, 2]);
        let identity = MixConfig { k_max: 0, ..cfg };
        assert_eq!(augment_records(&recs, &moire, 17, &identity).unwrap(), recs);
    }
}
