#![allow(dead_code)]

use dpcnn_data::{generate_dataset, AmplitudeConvention, Dataset, GenerationConfig};
use dpcnn_optics::{make_led_grid_5x5, LedArray};

pub fn grid_array() -> LedArray {
    make_led_grid_5x5(7.2f64.to_radians().sin(), 0.175).unwrap()
}

/// Small rendered phase-digit set on the default 5×5 geometry.
pub fn small_dataset(count: usize, seed: u64) -> Dataset {
    let mut cfg = GenerationConfig {
        count,
        seed,
        calibration_count: count.min(20),
        ..Default::default()
    };
    cfg.params.amplitude_convention = AmplitudeConvention::OneMinus;
    generate_dataset(&cfg).unwrap()
}
