use std::time::Instant;

use dpcnn_nn::{adam_step, AdamConfig, AdamState};

use crate::checks::{self, Check};

pub const PROPERTIES: [&str; 9] = [
    "pupil-symmetry",
    "optics-oracle",
    "dark-field-null",
    "physical-algebra",
    "frozen-baseline",
    "gradient-exactness",
    "adam-first-step",
    "majority-vote",
    "pattern-analytics",
];

/// The first Adam step moves each coordinate by the step size against the
/// sign of its gradient.
fn adam_first_step() -> Check {
    let config = AdamConfig {
        step_size: 0.01,
        ..Default::default()
    };
    let g = [3.0f64, -0.5, 1e-3];
    let mut p = [1.0f64, 1.0, 1.0];
    let mut state = AdamState::new(config, &[3]).map_err(|e| e.to_string())?;
    adam_step(&mut [&mut p[..]], &[&g[..]], &mut state).map_err(|e| e.to_string())?;
    for (i, (&pi, &gi)) in p.iter().zip(&g).enumerate() {
        let want = 1.0 - 0.01 * gi.signum();
        // ε perturbs the update by at most ε/|g| relative
        if !((pi - want).abs() <= 2.0 * 0.01 * 1e-8 / gi.abs() + 1e-15) {
            return Err(format!("coordinate {i}: {pi} vs {want}"));
        }
    }
    Ok("3 coordinates".into())
}

fn run_property(name: &str, corrupt: Option<&str>) -> Check {
    match name {
        "pupil-symmetry" => checks::pupil_symmetry(corrupt == Some(name)),
        "optics-oracle" => checks::optics_oracle(20, 1e-10, 1),
        "dark-field-null" => checks::dark_field_null(1e-9),
        "physical-algebra" => checks::physical_algebra(10, 1e-12, 2),
        "frozen-baseline" => checks::frozen_baseline(2),
        "gradient-exactness" => checks::gradient_exactness(25, 1e-5, 3),
        "adam-first-step" => adam_first_step(),
        "majority-vote" => checks::majority_vote_oracle(200, 4),
        "pattern-analytics" => checks::pattern_analytics(200, 1e-12, 5),
        other => Err(format!("unknown property {other}")),
    }
}

/// Runs every property, printing one line each. Returns the name of the
/// first failing property, if any. `corrupt` names a property whose input is
/// deliberately damaged (supported: "pupil-symmetry").
pub fn cmd_selftest(corrupt: Option<&str>, out: &mut dyn FnMut(&str)) -> Result<(), String> {
    if let Some(c) = corrupt {
        if c != "pupil-symmetry" {
            return Err(format!("no corruption hook for {c}"));
        }
    }
    let mut first_failure = None;
    let start = Instant::now();
    for name in PROPERTIES {
        let t = Instant::now();
        let outcome = run_property(name, corrupt);
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => out(&format!("PASS {name} ({detail}; {secs:.1}s)")),
            Err(why) => {
                out(&format!("FAIL {name}: {why}"));
                first_failure.get_or_insert(name);
            }
        }
    }
    out(&format!("total {:.1}s", start.elapsed().as_secs_f64()));
    match first_failure {
        Some(name) => Err(name.to_string()),
        None => Ok(()),
    }
}
