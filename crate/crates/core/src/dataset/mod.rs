//! On-disk formats: Moiré mixing sets with manifests, CIFAR binary batches,
//! and augmented output datasets.

pub mod augmented;
pub mod cifar;
pub mod codec;
pub mod mixing_set;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use augmented::{augment_records, write_augmented_dataset, AugmentedHeader, AugmentedSummary};
pub use cifar::{read_cifar_batch, write_cifar_batch, LabeledImage};
pub use mixing_set::{
    build_mixing_set, load_mixing_set, verify_mixing_set, DatasetManifest, ManifestEntry,
    MixingSet, MixingSetParams, VerifyFailure, DEFAULT_COUNT,
};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a. Used as a content checksum, not for security.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn format_hash(hash: u64) -> String {
    format!("{hash:016x}")
}

pub fn parse_hash(s: &str) -> Option<u64> {
    (s.len() == 16)
        .then(|| u64::from_str_radix(s, 16).ok())
        .flatten()
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub(crate) fn to_sorted_json<T: Serialize>(value: &T) -> Vec<u8> {
    // serde_json::Value stores objects in a BTreeMap, which sorts keys.
    let value = serde_json::to_value(value).expect("plain data serializes");
    let mut out = serde_json::to_vec_pretty(&value).expect("plain data serializes");
    out.push(b'\n');
    out
}

/// Writes via a temporary file and rename, so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn hash_text_round_trip() {
        for h in [0, 1, u64::MAX, 0xdead_beef] {
            assert_eq!(parse_hash(&format_hash(h)), Some(h));
        }
        assert_eq!(parse_hash("abc"), None);
        assert_eq!(parse_hash("zzzzzzzzzzzzzzzz"), None);
    }

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let text = String::from_utf8(to_sorted_json(&S { zeta: 1, alpha: 2 })).unwrap();
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
        assert!(text.ends_with("}\n"));
    }
}
