//! Central-difference gradient checking.
//!
//! Exclusion rule: a coordinate is skipped when either perturbed evaluation
//! lands in a different activation pattern (some ReLU input changes sign or a
//! max-pool winner changes) than the unperturbed point. This is the exact form
//! of "the pre-activation is within the step of a kink": across a kink the
//! central difference measures an average of two slopes, not the derivative.
//! Before excluding, the step is retried at a tenth of its size `retries` times.
//! Closures without kinks return a constant pattern.

use rand::seq::index::sample;
use rand::SeedableRng;

use crate::error::NnError;

/// One closure evaluation: loss plus an activation-pattern fingerprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub loss: f64,
    pub pattern: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub name: String,
    pub checked: usize,
    /// Checked only after shrinking the step.
    pub shrunk: usize,
    pub excluded: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub groups: Vec<GroupReport>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max)
    }

    pub fn checked(&self) -> usize {
        self.groups.iter().map(|g| g.checked).sum()
    }
}

/// `|a - n| / max(|a|, |n|, floor)`. The floor keeps round-off on near-zero
/// derivatives from reading as a large relative error: a central difference
/// cannot resolve derivatives much below `ulp(loss) / step`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(floor)
}

/// Parameter groups checked by [`grad_check`]: `params[g]` is perturbed in place,
/// `analytic[g]` holds the gradient under test.
pub struct GradCheckSpec<'a> {
    pub names: &'a [&'a str],
    pub analytic: &'a [Vec<f64>],
    pub epsilon: f64,
    /// Step reductions tried when a probe crosses a kink.
    pub retries: u32,
    /// Coordinates per group; whole groups are checked when smaller.
    pub samples: usize,
    /// Denominator floor as a fraction of the largest analytic magnitude in the group.
    pub relative_floor: f64,
    pub seed: u64,
}

/// Compare `analytic` against central differences of `eval` over a random
/// subsample of each group. Errors if any loss is non-finite.
/// The closure's error type only needs to absorb [`NnError`].
pub fn grad_check<F, E>(params: &mut [Vec<f64>], spec: &GradCheckSpec<'_>, mut eval: F) -> std::result::Result<GradCheckReport, E>
where
    F: FnMut(&[Vec<f64>]) -> std::result::Result<Probe, E>,
    E: From<NnError>,
{
    if params.len() != spec.analytic.len() || params.len() != spec.names.len() {
        return Err(NnError::InvalidArgument("group count mismatch".into()).into());
    }
    if !(spec.epsilon > 0.0) {
        return Err(NnError::InvalidArgument(format!("epsilon {} must be positive", spec.epsilon)).into());
    }
    let finite = |p: Probe| {
        if p.loss.is_finite() {
            Ok(p)
        } else {
            Err(E::from(NnError::NonFinite("loss".into())))
        }
    };
    let base = finite(eval(params)?)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let mut groups = Vec::with_capacity(params.len());
    for g in 0..params.len() {
        let len = params[g].len();
        if spec.analytic[g].len() != len {
            return Err(NnError::Shape(format!("{}: gradient length mismatch", spec.names[g])).into());
        }
        let mut idx: Vec<usize> = if len <= spec.samples {
            (0..len).collect()
        } else {
            sample(&mut rng, len, spec.samples).into_vec()
        };
        idx.sort_unstable();
        let floor = spec.relative_floor * spec.analytic[g].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut report = GroupReport {
            name: spec.names[g].to_string(),
            checked: 0,
            shrunk: 0,
            excluded: 0,
            max_rel_error: 0.0,
        };
        for i in idx {
            let orig = params[g][i];
            let mut step = spec.epsilon;
            let mut numeric = None;
            for attempt in 0..=spec.retries {
                params[g][i] = orig + step;
                let plus = eval(params).and_then(finite);
                params[g][i] = orig - step;
                let minus = eval(params).and_then(finite);
                params[g][i] = orig;
                let (plus, minus) = (plus?, minus?);
                if plus.pattern == base.pattern && minus.pattern == base.pattern {
                    numeric = Some((plus.loss - minus.loss) / (2.0 * step));
                    if attempt > 0 {
                        report.shrunk += 1;
                    }
                    break;
                }
                step /= 10.0;
            }
            let Some(numeric) = numeric else {
                report.excluded += 1;
                continue;
            };
            let err = relative_error(spec.analytic[g][i], numeric, floor);
            report.max_rel_error = report.max_rel_error.max(err);
            report.checked += 1;
        }
        groups.push(report);
    }
    Ok(GradCheckReport { groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_is_exact() {
        let x: Vec<f64> = (0..500).map(|i| (i as f64 * 0.61).cos() * 3.0).collect();
        let mut params = vec![(0..500).map(|i| i as f64 * 1e-3).collect::<Vec<_>>()];
        let spec = GradCheckSpec {
            names: &["w"],
            analytic: &[x.clone()],
            epsilon: 1e-3,
            retries: 0,
            samples: 200,
            relative_floor: 0.0,
            seed: 0,
        };
        let report = grad_check(&mut params, &spec, |p| {
            Ok::<_, NnError>(Probe {
                loss: p[0].iter().zip(&x).map(|(a, b)| a * b).sum(),
                pattern: 0,
            })
        })
        .unwrap();
        assert_eq!(report.checked(), 200);
        assert!(report.max_rel_error() < 1e-10, "{}", report.max_rel_error());
    }

    #[test]
    fn kink_crossings_are_excluded() {
        // loss = Σ relu(w_i); coordinates within epsilon of zero cross the kink
        let eps = 1e-4;
        let mut params = vec![vec![0.5, -0.5, 0.5 * eps, -0.5 * eps, 1.0]];
        let analytic = vec![params[0].iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect()];
        let spec = GradCheckSpec {
            names: &["w"],
            analytic: &analytic,
            epsilon: eps,
            retries: 0,
            samples: 200,
            relative_floor: 0.0,
            seed: 0,
        };
        let report = grad_check(&mut params, &spec, |p| {
            let mut pattern = 0u64;
            for (i, &w) in p[0].iter().enumerate() {
                pattern |= ((w > 0.0) as u64) << i;
            }
            Ok::<_, NnError>(Probe {
                loss: p[0].iter().map(|w| w.max(0.0)).sum(),
                pattern,
            })
        })
        .unwrap();
        assert_eq!(report.groups[0].excluded, 2);
        assert_eq!(report.groups[0].checked, 3);
        assert!(report.max_rel_error() < 1e-10);
    }

    #[test]
    fn non_finite_loss_errors() {
        let mut params = vec![vec![1.0]];
        let spec = GradCheckSpec {
            names: &["w"],
            analytic: &[vec![0.0]],
            epsilon: 1e-3,
            retries: 0,
            samples: 1,
            relative_floor: 0.0,
            seed: 0,
        };
        let r = grad_check(&mut params, &spec, |p| {
            Ok::<_, NnError>(Probe {
                loss: if p[0][0] > 1.0 { f64::NAN } else { 0.0 },
                pattern: 0,
            })
        });
        assert!(matches!(r, Err(NnError::NonFinite(_))));
    }
}
