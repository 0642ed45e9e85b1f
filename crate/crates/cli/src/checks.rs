//! Invariant checks with independent reference computations. Each check
//! returns a one-line detail on success and a description of the first
//! violation on failure. `selftest` runs them at small sizes; the acceptance
//! tests run them at full size.

use dpcnn_core::{
    canonicalize_sign, default_input_gain, joint_loss_and_grad, majority_vote, pattern_stats, physical_layer,
    train_fixed, IlluminationWeights, JointModel, TrainConfig,
};
use dpcnn_data::{generate_dataset, AmplitudeConvention, Dataset, GenerationConfig, SubImageStack};
use dpcnn_nn::{grad_check, Cnn, CnnParams, CnnShape, GradCheckSpec, GROUP_NAMES};
use dpcnn_optics::{
    make_led_grid_5x5, make_pupil, shifted_pupil, ComplexField, GridSpec, Imager, LedArray, PupilMask, SensorSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<String, String>;

/// The default imaging geometry: 32 px at 1.25 µm, λ = 0.5 µm, NA 0.175 and
/// the 5×5 grid at sin 7.2°.
pub fn default_geometry() -> (GridSpec, LedArray, PupilMask) {
    let grid = GridSpec {
        side_px: 32,
        pitch: 1.25,
        wavelength: 0.5,
    };
    let array = make_led_grid_5x5(7.2f64.to_radians().sin(), 0.175).expect("valid grid");
    let pupil = make_pupil(grid, 0.175).expect("valid pupil");
    (grid, array, pupil)
}

/// Pupil mask equals its point reflection f → −f, checked entry by entry.
/// `corrupt` removes one passband sample first, to exercise failure reporting.
pub fn pupil_symmetry(corrupt: bool) -> Check {
    let (_, _, mut pupil) = default_geometry();
    let n = pupil.grid.side_px;
    if corrupt {
        // an off-axis sample just inside the cutoff
        let k = (1..n).rev().find(|&kx| pupil.mask[kx] && kx != n - kx).ok_or("pupil passes only DC")?;
        pupil.mask[k] = false;
    }
    for ky in 0..n {
        for kx in 0..n {
            let (mx, my) = ((n - kx) % n, (n - ky) % n);
            if pupil.mask[ky * n + kx] != pupil.mask[my * n + mx] {
                return Err(format!("bin ({kx}, {ky}) differs from its mirror ({mx}, {my})"));
            }
        }
    }
    Ok(format!("{n}×{n} mask, {} passband samples", pupil.mask.iter().filter(|&&m| m).count()))
}

/// Coherent PSF of a mask by explicit inverse-DFT summation.
fn explicit_psf(mask: &[bool], n: usize) -> Vec<Complex64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for y in 0..n {
        for x in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for ky in 0..n {
                for kx in 0..n {
                    if mask[ky * n + kx] {
                        acc += Complex64::from_polar(1.0, tau * ((kx * x + ky * y) % n) as f64 / n as f64);
                    }
                }
            }
            h[y * n + x] = acc / (n * n) as f64;
        }
    }
    h
}

/// `|o ⊛ h|²` with the circular convolution summed in the spatial domain.
fn direct_intensity(o: &[Complex64], h: &[Complex64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for v in 0..n {
                for u in 0..n {
                    acc += o[v * n + u] * h[((y + n - v) % n) * n + (x + n - u) % n];
                }
            }
            out[y * n + x] = acc.norm_sqr();
        }
    }
    out
}

/// FFT-path sub-images against direct circular convolution on random fields
/// of side 4 to 16, random apertures and random LEDs.
pub fn optics_oracle(cases: usize, tolerance: f64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let n = rng.gen_range(4..=16);
        let grid = GridSpec {
            side_px: n,
            pitch: rng.gen_range(0.5..2.0),
            wavelength: 0.5,
        };
        let na = rng.gen_range(0.05..0.6);
        let pupil = make_pupil(grid, na).map_err(|e| e.to_string())?;
        let array = make_led_grid_5x5(rng.gen_range(0.02..0.15), na).map_err(|e| e.to_string())?;
        let sensor = SensorSpec {
            side_px: n,
            readout_sigma: 0.0,
            sample_sigma: 0.0,
        };
        let led = rng.gen_range(0..array.len());
        let (sx, sy) = (array.leds[led].sx, array.leds[led].sy);
        let imager = Imager::new(pupil.clone(), sensor, array).map_err(|e| e.to_string())?;
        let values: Vec<Complex64> =
            (0..n * n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let field = ComplexField::new(grid, values.clone()).map_err(|e| e.to_string())?;
        let fast = imager.object_plane_intensity(&field, led).map_err(|e| e.to_string())?;
        let h = explicit_psf(&shifted_pupil(&pupil, sx, sy), n);
        let slow = direct_intensity(&values, &h, n);
        let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            if fast.iter().any(|&v| v != 0.0) {
                return Err(format!("case {case}: oracle is dark but FFT path is not"));
            }
            continue;
        }
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        worst = worst.max(err);
        if !(err <= tolerance) {
            return Err(format!("case {case} (n = {n}, LED {led}): relative error {err:e}"));
        }
    }
    Ok(format!("{cases} random fields, max relative error {worst:.2e}"))
}

/// Uniform object: every dark-field LED of the default array leaves the
/// detector dark relative to the on-axis image.
pub fn dark_field_null(ratio: f64) -> Check {
    let (grid, array, pupil) = default_geometry();
    let sensor = SensorSpec {
        side_px: 28,
        readout_sigma: 0.0,
        sample_sigma: 0.0,
    };
    let center = array.center_index().ok_or("empty LED array")?;
    let leds = array.leds.clone();
    let imager = Imager::new(pupil, sensor, array).map_err(|e| e.to_string())?;
    let field = ComplexField::constant(grid, Complex64::new(1.0, 0.0));
    let peak = |l: usize| -> std::result::Result<f64, String> {
        let img = imager.subimage::<ChaCha8Rng>(&field, l, None).map_err(|e| e.to_string())?;
        Ok(img.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    };
    let bright = peak(center)?;
    if !(bright > 0.0) {
        return Err("on-axis image is dark".into());
    }
    let mut worst = 0.0f64;
    let mut dark = 0;
    for (l, led) in leds.iter().enumerate() {
        if led.bright_field {
            continue;
        }
        dark += 1;
        let r = peak(l)? / bright;
        worst = worst.max(r);
        if !(r < ratio) {
            return Err(format!("dark-field LED {l} peaks at {r:e} of the on-axis level"));
        }
    }
    Ok(format!("{dark} dark-field LEDs, worst ratio {worst:e}"))
}

/// Linearity `x(a·w₁ + b·w₂) = a·x(w₁) + b·x(w₂)` and odd symmetry
/// `x(−w) = −x(w)` on random 25×28×28 stacks.
pub fn physical_algebra(cases: usize, tolerance: f64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l, n) = (25, 28 * 28);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let planes: Vec<f64> = (0..l * n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let w1: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w2: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let mix: Vec<f64> = w1.iter().zip(&w2).map(|(p, q)| a * p + b * q).collect();
        let x = |w: &[f64]| physical_layer(&planes, l, w).map_err(|e| e.to_string());
        let (x1, x2, xm) = (x(&w1)?, x(&w2)?, x(&mix)?);
        let neg: Vec<f64> = w1.iter().map(|v| -v).collect();
        let xn = x(&neg)?;
        let scale = x1.iter().chain(&x2).fold(1.0f64, |m, v| m.max(v.abs())) * (a.abs() + b.abs()).max(1.0);
        for i in 0..n {
            let err = (xm[i] - (a * x1[i] + b * x2[i])).abs() / scale;
            worst = worst.max(err);
            if !(err <= tolerance) {
                return Err(format!("case {case} pixel {i}: linearity error {err:e}"));
            }
            if xn[i] != -x1[i] {
                return Err(format!("case {case} pixel {i}: x(-w) = {} but -x(w) = {}", xn[i], -x1[i]));
            }
        }
    }
    Ok(format!("{cases} random stacks, max relative linearity error {worst:.2e}"))
}

/// Tiny rendered phase-digit set on the default geometry.
pub fn tiny_dataset(count: usize, seed: u64) -> Result<Dataset, String> {
    let mut cfg = GenerationConfig {
        count,
        seed,
        calibration_count: count,
        ..Default::default()
    };
    cfg.params.amplitude_convention = AmplitudeConvention::OneMinus;
    generate_dataset(&cfg).map_err(|e| e.to_string())
}

/// Classifier-only training returns the illumination weights bit for bit.
pub fn frozen_baseline(iterations: usize) -> Check {
    let ds = tiny_dataset(6, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w: Vec<f64> = (0..ds.header.led_count).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let fixed = IlluminationWeights::new(w.clone()).map_err(|e| e.to_string())?;
    let config = TrainConfig {
        iterations,
        batch_size: 3,
        input_gain: default_input_gain(&ds.header),
        ..Default::default()
    };
    let trained = train_fixed(&ds.examples, &fixed, ds.header.class_count, &config).map_err(|e| e.to_string())?;
    let same = trained.w.len() == w.len() && trained.w.iter().zip(&w).all(|(a, b)| a.to_bits() == b.to_bits());
    if !same {
        return Err("train_fixed changed the illumination weights".into());
    }
    if fixed.w != w {
        return Err("input weights were mutated".into());
    }
    Ok(format!("{iterations} iterations, {} weights bit-identical", w.len()))
}

/// Central-difference check of the joint loss gradient: every LED weight and
/// `samples` coordinates per classifier group, 64-bit, dropout off.
pub fn gradient_exactness(samples: usize, tolerance: f64, seed: u64) -> Check {
    let ds = tiny_dataset(3, 6)?;
    let batch: Vec<&SubImageStack> = ds.examples.iter().collect();
    let shape = CnnShape::mnist(ds.header.class_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = CnnParams::<f64>::init(&shape, 0.1, 0.1, &mut rng).map_err(|e| e.to_string())?;
    let mut model = JointModel {
        w: (0..ds.header.led_count).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        cnn: Cnn::new(shape, params).map_err(|e| e.to_string())?,
        gain: default_input_gain(&ds.header),
    };
    let (_, d_w, grads) = joint_loss_and_grad(&model, &batch, None).map_err(|e| e.to_string())?;
    let mut names = vec!["illumination"];
    names.extend(GROUP_NAMES);
    let mut analytic = vec![d_w];
    analytic.extend(grads.groups.iter().map(|g| g.data.clone()));
    let mut values = vec![model.w.clone()];
    values.extend(model.cnn.params.groups.iter().map(|g| g.data.clone()));
    let spec = GradCheckSpec {
        names: &names,
        analytic: &analytic,
        epsilon: 1e-5,
        retries: 2,
        samples,
        relative_floor: 1e-3,
        seed,
    };
    let report = grad_check(&mut values, &spec, |p| {
        model.w.copy_from_slice(&p[0]);
        for (g, v) in model.cnn.params.groups.iter_mut().zip(&p[1..]) {
            g.data.copy_from_slice(v);
        }
        model.probe(&batch)
    })
    .map_err(|e| e.to_string())?;
    let leds = &report.groups[0];
    if leds.checked != ds.header.led_count {
        return Err(format!(
            "only {} of {} LED weights could be checked",
            leds.checked, ds.header.led_count
        ));
    }
    for g in &report.groups {
        let wanted = samples.min(analytic[names.iter().position(|n| *n == g.name).unwrap()].len());
        if g.checked * 10 < wanted * 9 {
            return Err(format!("{}: only {} of {wanted} coordinates checked", g.name, g.checked));
        }
    }
    let worst = report.max_rel_error();
    if !(worst < tolerance) {
        let g = report
            .groups
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
            .unwrap();
        return Err(format!("{}: relative error {:e}", g.name, g.max_rel_error));
    }
    Ok(format!("{} coordinates, max relative error {worst:.2e}", report.checked()))
}

/// Modal class by explicit histogram; ties to the lowest class.
fn histogram_vote(sets: &[Vec<u32>], i: usize) -> u32 {
    let mut hist = std::collections::BTreeMap::new();
    for s in sets {
        *hist.entry(s[i]).or_insert(0usize) += 1;
    }
    let top = *hist.values().max().unwrap();
    *hist.iter().find(|(_, &c)| c == top).unwrap().0
}

/// `majority_vote` against per-example histograms on random K ≤ 9, N ≤ 100
/// cases, then the 4-of-7 rule for every binary vote pattern.
pub fn majority_vote_oracle(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let k = rng.gen_range(1..=9);
        let n = rng.gen_range(1..=100);
        let classes = rng.gen_range(1..=10u32);
        let sets: Vec<Vec<u32>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..classes)).collect()).collect();
        let votes = majority_vote(&sets).map_err(|e| e.to_string())?;
        for (i, &v) in votes.iter().enumerate() {
            let want = histogram_vote(&sets, i);
            if v != want {
                return Err(format!("case {case} example {i}: voted {v}, histogram says {want}"));
            }
        }
    }
    // all 2^7 binary ballots
    let sets: Vec<Vec<u32>> = (0..7).map(|t| (0..128u32).map(|b| (b >> t) & 1).collect()).collect();
    let votes = majority_vote(&sets).map_err(|e| e.to_string())?;
    for (b, &v) in votes.iter().enumerate() {
        let want = u32::from((b as u32).count_ones() >= 4);
        if v != want {
            return Err(format!("ballot {b:07b}: voted {v}, 4-of-7 says {want}"));
        }
    }
    Ok(format!("{cases} random cases and all 128 binary 7-trial ballots"))
}

/// `pattern_stats` against per-LED accumulation, and `canonicalize_sign`
/// idempotence and sign invariance, on random vectors.
pub fn pattern_analytics(cases: usize, tolerance: f64, seed: u64) -> Check {
    let (_, array, _) = default_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rings = 1 + array.leds.iter().map(|l| l.ring as usize).max().unwrap_or(0);
    for case in 0..cases {
        let w: Vec<f64> = (0..array.len())
            .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(-2.0..2.0) })
            .collect();
        if w.iter().all(|&v| v == 0.0) {
            continue;
        }
        let stats = pattern_stats(&w, &array).map_err(|e| e.to_string())?;
        let mut ring = vec![0.0; rings];
        let (mut neg, mut total) = (0.0, 0.0);
        for (l, led) in array.leds.iter().enumerate() {
            let e = w[l] * w[l];
            total += e;
            ring[led.ring as usize] += e;
            if w[l] < 0.0 {
                neg += e;
            }
        }
        if stats.ring_energy_fractions.len() != rings {
            return Err(format!("case {case}: {} ring fractions", stats.ring_energy_fractions.len()));
        }
        for (r, (&got, e)) in stats.ring_energy_fractions.iter().zip(&ring).enumerate() {
            if !((got - e / total).abs() <= tolerance) {
                return Err(format!("case {case} ring {r}: {got} vs {}", e / total));
            }
        }
        if !((stats.negative_energy_fraction - neg / total).abs() <= tolerance) {
            return Err(format!("case {case}: negative fraction {}", stats.negative_energy_fraction));
        }
        let c = canonicalize_sign(&w).map_err(|e| e.to_string())?;
        let neg_w: Vec<f64> = w.iter().map(|v| -v).collect();
        if canonicalize_sign(&c).map_err(|e| e.to_string())? != c {
            return Err(format!("case {case}: canonicalize_sign is not idempotent"));
        }
        if canonicalize_sign(&neg_w).map_err(|e| e.to_string())? != c {
            return Err(format!("case {case}: canonicalize_sign(-w) differs"));
        }
        if c != w && c != neg_w {
            return Err(format!("case {case}: result is neither w nor -w"));
        }
    }
    Ok(format!("{cases} random vectors"))
}
