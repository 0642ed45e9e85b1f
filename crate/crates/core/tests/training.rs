mod common;

use dpcnn_core::*;
use dpcnn_data::SubImageStack;
use dpcnn_nn::{grad_check, Cnn, CnnParams, CnnShape, GradCheckSpec, GROUP_NAMES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick_config(iterations: usize, gain: f64) -> TrainConfig {
    TrainConfig {
        iterations,
        batch_size: 8,
        step_size: 1e-3,
        input_gain: gain,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn one_step_moves_weights_and_classifier() {
    let ds = common::small_dataset(16, 1);
    let gain = default_input_gain(&ds.header);
    let cfg = quick_config(1, gain);
    let trained = train_dpcnn(&ds.examples, 10, &cfg).unwrap();
    let zero_iter = train_dpcnn(&ds.examples, 10, &TrainConfig { step_size: 1e-30, ..cfg.clone() }).unwrap();
    assert!(trained.w.iter().zip(&zero_iter.w).all(|(a, b)| a != b));
    assert_ne!(trained.params, zero_iter.params);
    assert_eq!(trained.loss_trace.len(), 1);
}

#[test]
fn fixed_training_leaves_weights_bit_identical() {
    let ds = common::small_dataset(16, 2);
    let w = IlluminationWeights::new((0..25).map(|i| (i as f64 * 0.37).sin() / 3.0).collect()).unwrap();
    let before: Vec<u64> = w.w.iter().map(|v| v.to_bits()).collect();
    let trained = train_fixed(&ds.examples, &w, 10, &quick_config(3, default_input_gain(&ds.header))).unwrap();
    let after: Vec<u64> = trained.w.iter().map(|v| v.to_bits()).collect();
    assert_eq!(before, after);
}

#[test]
fn deterministic_runs_are_bit_identical() {
    let ds = common::small_dataset(24, 3);
    let cfg = quick_config(4, default_input_gain(&ds.header));
    let (train, test) = ds.examples.split_at(16);
    let a = run_trial(train, test, 10, &ds.header.array, Strategy::Optimized, &cfg).unwrap();
    let b = run_trial(train, test, 10, &ds.header.array, Strategy::Optimized, &cfg).unwrap();
    assert_eq!(a.metrics_json().unwrap(), b.metrics_json().unwrap());
    assert_eq!(a.params, b.params);
    let c = run_trial(train, test, 10, &ds.header.array, Strategy::Optimized, &TrainConfig { seed: 6, ..cfg }).unwrap();
    assert_ne!(a.metrics.w, c.metrics.w);
}

#[test]
fn trial_round_trips_through_disk() {
    let ds = common::small_dataset(20, 4);
    let cfg = quick_config(2, default_input_gain(&ds.header));
    let (train, test) = ds.examples.split_at(12);
    let r = run_trial(train, test, 10, &ds.header.array, Strategy::Dpc, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    r.save(dir.path()).unwrap();
    let back = load_trial(dir.path()).unwrap();
    assert_eq!(back, r);
    // accuracy is the trace of the confusion matrix and a recount of the dump
    let m = &back.metrics;
    let diag: u64 = (0..m.classes).map(|c| m.confusion[c][c]).sum();
    let total: u64 = m.confusion.iter().flatten().sum();
    assert_eq!(m.accuracy, diag as f64 / total as f64);
    let recount = m.predictions.iter().zip(&m.labels).filter(|(p, y)| p == y).count();
    assert_eq!(m.accuracy, recount as f64 / m.labels.len() as f64);
}

#[test]
fn rejects_bad_inputs() {
    let ds = common::small_dataset(6, 5);
    let cfg = quick_config(1, 1.0);
    assert!(train_dpcnn(&[], 10, &cfg).is_err());
    assert!(train_dpcnn(&ds.examples, 10, &TrainConfig { iterations: 0, ..cfg.clone() }).is_err());
    assert!(train_dpcnn(&ds.examples, 10, &TrainConfig { step_size: -1.0, ..cfg.clone() }).is_err());
    let short = IlluminationWeights::new(vec![1.0; 3]).unwrap();
    assert!(train_fixed(&ds.examples, &short, 10, &cfg).is_err());
    let huge = TrainConfig { input_gain: 1e30, step_size: 1e10, optimizer: OptimizerKind::Sgd, ..cfg };
    match train_dpcnn(&ds.examples, 10, &TrainConfig { iterations: 50, ..huge }) {
        Err(CoreError::NonFiniteLoss { iteration, .. }) => assert!(iteration < 50),
        other => panic!("expected a non-finite abort, got {:?}", other.map(|t| t.loss_trace)),
    }
}

/// f64 joint model with every LED weight and the classifier in one parameter list.
fn joint_f64(ds: &dpcnn_data::Dataset) -> JointModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shape = CnnShape::mnist(10);
    let params = CnnParams::<f64>::init(&shape, 0.1, 0.1, &mut rng).unwrap();
    JointModel {
        w: (0..25).map(|i| ((i * 7 % 11) as f64 - 5.0) / 10.0).collect(),
        cnn: Cnn::new(shape, params).unwrap(),
        gain: default_input_gain(&ds.header),
    }
}

#[test]
fn joint_gradient_matches_finite_differences() {
    let ds = common::small_dataset(3, 6);
    let batch: Vec<&SubImageStack> = ds.examples.iter().collect();
    let mut model = joint_f64(&ds);
    let (_, d_w, grads) = joint_loss_and_grad(&model, &batch, None).unwrap();
    let mut names = vec!["illumination"];
    names.extend(GROUP_NAMES);
    let mut analytic = vec![d_w];
    analytic.extend(grads.groups.iter().map(|g| g.data.clone()));
    let mut params = vec![model.w.clone()];
    params.extend(model.cnn.params.groups.iter().map(|g| g.data.clone()));
    let spec = GradCheckSpec {
        names: &names,
        analytic: &analytic,
        epsilon: 1e-5,
        retries: 2,
        samples: 200,
        relative_floor: 1e-3,
        seed: 2,
    };
    let report = grad_check(&mut params, &spec, |p| {
        model.w.copy_from_slice(&p[0]);
        for (g, v) in model.cnn.params.groups.iter_mut().zip(&p[1..]) {
            g.data.copy_from_slice(v);
        }
        model.probe(&batch)
    })
    .unwrap();
    let w = &report.groups[0];
    assert_eq!(w.checked, 25, "all LED weights checked");
    for g in &report.groups {
        assert!(g.excluded * 10 <= g.checked + g.excluded, "{}: {} excluded", g.name, g.excluded);
    }
    assert!(report.max_rel_error() < 1e-5, "{:?}", report);
}

#[test]
fn smoothed_loss_decreases_early_in_training() {
    let ds = common::small_dataset(5000, 21);
    let gain = default_input_gain(&ds.header);
    let config = TrainConfig {
        iterations: 200,
        input_gain: gain,
        ..Default::default()
    };
    let trained = train_dpcnn(&ds.examples, 10, &config).unwrap();
    let trace = &trained.loss_trace;
    assert_eq!(trace.len(), 200);
    let smoothed: Vec<f64> = trace
        .chunks(50)
        .map(|w| w.iter().map(|&v| v as f64).sum::<f64>() / 50.0)
        .collect();
    assert_eq!(smoothed.len(), 4);
    for (i, pair) in smoothed.windows(2).enumerate() {
        assert!(pair[1] <= pair[0], "block {i}: {} rises to {}", pair[0], pair[1]);
    }
}
