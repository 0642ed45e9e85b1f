mod common;

use dpcnn_core::{baseline_pattern, BaselineKind};
use dpcnn_optics::LedArray;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn dpc_is_antisymmetric() {
    let w = baseline_pattern(BaselineKind::Dpc, &common::grid_array(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(w.w.iter().filter(|&&v| v > 0.0).count(), 10);
    assert_eq!(w.w.iter().filter(|&&v| v < 0.0).count(), 10);
    assert_eq!(w.w.iter().filter(|&&v| v == 0.0).count(), 5);
    assert!(w.w.iter().sum::<f64>().abs() < 1e-15);
}

#[test]
fn random_signed_is_seeded_and_centered() {
    let array = common::grid_array();
    let a = baseline_pattern(BaselineKind::RandomSigned, &array, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = baseline_pattern(BaselineKind::RandomSigned, &array, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut draws = Vec::new();
    while draws.len() < 10_000 {
        draws.extend(baseline_pattern(BaselineKind::RandomSigned, &array, &mut rng).unwrap().w);
    }
    assert!(draws.iter().all(|v| (-1.0..1.0).contains(v)));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!(mean.abs() < 0.02, "{mean}");
}

#[test]
fn preconditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    // every LED left of the axis: DPC impossible; no +x LED: off-axis impossible
    let left = LedArray::from_positions(&[(0.0, 0.0, 0), (-0.1, 0.0, 1)], 0.175).unwrap();
    assert!(baseline_pattern(BaselineKind::Dpc, &left, &mut rng).is_err());
    assert!(baseline_pattern(BaselineKind::OffAxis, &left, &mut rng).is_err());
    let dark = LedArray::from_positions(&[(0.0, 0.0, 0), (0.3, 0.0, 1)], 0.175).unwrap();
    assert!(baseline_pattern(BaselineKind::OffAxis, &dark, &mut rng).is_err());
    let no_center = LedArray::from_positions(&[(0.1, 0.0, 1)], 0.175).unwrap();
    assert!(baseline_pattern(BaselineKind::Center, &no_center, &mut rng).is_err());
}
