mod common;

use dpcnn_data::container::{decode, encode};
use dpcnn_data::{load_dataset, save_dataset, DataError, FORMAT_VERSION};

#[test]
fn two_examples_round_trip_bit_identical() {
    let ds = common::small_dataset(2, 5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.ds");
    save_dataset(&path, &ds).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(back.header, ds.header);
    assert_eq!(back.examples.len(), 2);
    for (a, b) in back.examples.iter().zip(&ds.examples) {
        let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.images), bits(&b.images));
        assert_eq!((a.label, a.object_id), (b.label, b.object_id));
    }
    assert_eq!(std::fs::read(&path).unwrap(), encode(&back).unwrap());
}

#[test]
fn every_truncation_is_rejected() {
    let bytes = encode(&common::small_dataset(2, 1)).unwrap();
    // every prefix length from the header region plus a spread through the payload
    let cuts: Vec<usize> = (0..400).chain((400..bytes.len()).step_by(997)).chain([bytes.len() - 1]).collect();
    for cut in cuts {
        match decode(&bytes[..cut]) {
            Err(DataError::Truncated(_)) | Err(DataError::BadMagic) => {}
            other => panic!("cut at {cut}: {:?}", other.map(|d| d.len())),
        }
    }
}

#[test]
fn header_bit_flip_fails_checksum() {
    let bytes = encode(&common::small_dataset(2, 1)).unwrap();
    // noise reference lives at offset 36; flip its lowest mantissa bit
    let mut bad = bytes.clone();
    bad[36] ^= 1;
    assert!(matches!(decode(&bad), Err(DataError::Checksum("header"))));
}

#[test]
fn payload_bit_flip_fails_checksum() {
    let bytes = encode(&common::small_dataset(2, 1)).unwrap();
    let mut bad = bytes.clone();
    let last = bad.len() - 10;
    bad[last] ^= 0x10;
    assert!(matches!(decode(&bad), Err(DataError::Checksum("payload"))));
}

#[test]
fn version_and_magic_are_checked() {
    let bytes = encode(&common::small_dataset(1, 1)).unwrap();
    let mut bad = bytes.clone();
    bad[8..12].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    match decode(&bad) {
        Err(DataError::VersionMismatch { found, expected }) => {
            assert_eq!((found, expected), (FORMAT_VERSION + 1, FORMAT_VERSION))
        }
        other => panic!("{:?}", other.map(|d| d.len())),
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode(&bad), Err(DataError::BadMagic)));
    let mut long = bytes;
    long.push(0);
    assert!(matches!(decode(&long), Err(DataError::Format(_))));
}

#[test]
fn missing_file_reports_path() {
    let err = load_dataset(std::path::Path::new("/nonexistent/dir/x.ds")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/x.ds"));
}
