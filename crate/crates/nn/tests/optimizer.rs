use dpcnn_nn::{adam_step, AdamConfig, AdamState};

/// Scalar Adam written directly from the published algorithm.
fn reference_adam(x0: f64, grad: impl Fn(f64) -> f64, steps: usize, alpha: f64) -> Vec<f64> {
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
    let (mut m, mut v, mut x) = (0.0, 0.0, x0);
    let mut out = vec![x0];
    for t in 1..=steps {
        let g = grad(x);
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1.powi(t as i32));
        let v_hat = v / (1.0 - b2.powi(t as i32));
        x -= alpha * m_hat / (v_hat.sqrt() + eps);
        out.push(x);
    }
    out
}

#[test]
fn zero_gradient_leaves_everything() {
    let mut s = AdamState::<f64>::new(AdamConfig::default(), &[3]).unwrap();
    let mut p = [0.5, -1.0, 2.0];
    adam_step(&mut [&mut p[..]], &[&[0.0; 3][..]], &mut s).unwrap();
    assert_eq!(p, [0.5, -1.0, 2.0]);
    assert!(s.m[0].iter().chain(&s.v[0]).all(|&v| v == 0.0));
    assert_eq!(s.step, 1);
}

#[test]
fn first_step_moves_by_step_size_times_sign() {
    let cfg = AdamConfig { step_size: 1e-3, ..Default::default() };
    let mut s = AdamState::<f64>::new(cfg, &[4]).unwrap();
    let mut p = [0.0; 4];
    let g = [3.0, -0.02, 150.0, -7.0];
    adam_step(&mut [&mut p[..]], &[&g[..]], &mut s).unwrap();
    for (x, gi) in p.iter().zip(g) {
        assert!((x + 1e-3 * gi.signum()).abs() < 1e-3 * 1e-6, "{x}");
    }
}

#[test]
fn quadratic_descent_matches_reference() {
    let cfg = AdamConfig { step_size: 0.1, ..Default::default() };
    let reference = reference_adam(1.0, |x| 2.0 * x, 50, 0.1);
    let mut s = AdamState::<f64>::new(cfg, &[1]).unwrap();
    let mut x = [1.0f64];
    let mut path = vec![1.0];
    for _ in 0..50 {
        let g = [2.0 * x[0]];
        adam_step(&mut [&mut x[..]], &[&g[..]], &mut s).unwrap();
        path.push(x[0]);
    }
    for (a, b) in path.iter().zip(&reference) {
        assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
    }
    // momentum carries x through zero at step 12; up to there |x| shrinks every step
    let crossing = path.iter().position(|&x| x < 0.0).unwrap();
    assert_eq!(crossing, 12);
    for t in 3..crossing - 1 {
        assert!(path[t + 1].abs() < path[t].abs(), "not monotone at step {}", t + 1);
    }
    assert!(path[50].abs() < 0.5);
    assert_eq!(s.step, 50);
}

#[test]
fn single_precision_tracks_double() {
    let cfg = AdamConfig { step_size: 0.01, ..Default::default() };
    let mut s32 = AdamState::<f32>::new(cfg, &[1]).unwrap();
    let mut s64 = AdamState::<f64>::new(cfg, &[1]).unwrap();
    let (mut a, mut b) = ([1.0f32], [1.0f64]);
    for _ in 0..100 {
        let (ga, gb) = ([2.0 * a[0]], [2.0 * b[0]]);
        adam_step(&mut [&mut a[..]], &[&ga[..]], &mut s32).unwrap();
        adam_step(&mut [&mut b[..]], &[&gb[..]], &mut s64).unwrap();
    }
    assert!((a[0] as f64 - b[0]).abs() < 1e-5);
}
