#![allow(dead_code)]

use dpcnn_data::{generate_dataset, AmplitudeConvention, Dataset, GenerationConfig};

pub fn small_config(count: usize, seed: u64) -> GenerationConfig {
    let mut cfg = GenerationConfig::default();
    cfg.count = count;
    cfg.seed = seed;
    cfg.calibration_count = count.min(10);
    cfg.params.amplitude_convention = AmplitudeConvention::OneMinus;
    cfg
}

pub fn small_dataset(count: usize, seed: u64) -> Dataset {
    generate_dataset(&small_config(count, seed)).unwrap()
}
