use crate::error::{shape_err, NnError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            step_size: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step_size > 0.0
            && self.step_size.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NnError::InvalidArgument(format!("bad Adam settings {self:?}")))
        }
    }
}

/// Moment accumulators, one buffer per parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Result<Self> {
        config.validate()?;
        Ok(AdamState {
            config,
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            step: 0,
        })
    }
}

fn check_groups<T>(params: &[&mut [T]], grads: &[&[T]], sizes: Option<&[Vec<T>]>) -> Result<()> {
    if params.len() != grads.len() {
        return shape_err(format!("{} parameter groups, {} gradient groups", params.len(), grads.len()));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || sizes.is_some_and(|s| s.get(i).map(Vec::len) != Some(p.len())) {
            return shape_err(format!("group {i}: parameter/gradient/state lengths differ"));
        }
    }
    if sizes.is_some_and(|s| s.len() != params.len()) {
        return shape_err("optimizer state group count differs");
    }
    Ok(())
}

/// One bias-corrected Adam update:
/// `m ← β₁m + (1-β₁)g`, `v ← β₂v + (1-β₂)g²`, `p ← p - α·m̂/(√v̂ + ε)`.
pub fn adam_step<T: Scalar>(params: &mut [&mut [T]], grads: &[&[T]], state: &mut AdamState<T>) -> Result<()> {
    check_groups(params, grads, Some(&state.m))?;
    let c = state.config;
    let t = state.step + 1;
    let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
    let (one_b1, one_b2) = (T::from_f64(1.0 - c.beta1), T::from_f64(1.0 - c.beta2));
    let corr1 = 1.0 - c.beta1.powi(t as i32);
    let corr2 = 1.0 - c.beta2.powi(t as i32);
    // α·m̂/(√v̂+ε) rewritten as (α/c₁)·m/(√v·c₂^-½ + ε)
    let scale = T::from_f64(c.step_size / corr1);
    let root = T::from_f64(1.0 / corr2.sqrt());
    let eps = T::from_f64(c.epsilon);
    for (gi, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[gi], &mut state.v[gi]);
        for (((p, &g), m), v) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + one_b1 * g;
            *v = b2 * *v + one_b2 * g * g;
            *p -= scale * *m / (v.sqrt() * root + eps);
        }
    }
    state.step = t;
    Ok(())
}

/// `p ← p - step_size·g`.
pub fn sgd_step<T: Scalar>(params: &mut [&mut [T]], grads: &[&[T]], step_size: f64) -> Result<()> {
    check_groups(params, grads, None)?;
    if !(step_size > 0.0) {
        return Err(NnError::InvalidArgument(format!("step size {step_size} must be positive")));
    }
    let lr = T::from_f64(step_size);
    for (p, g) in params.iter_mut().zip(grads) {
        for (a, &b) in p.iter_mut().zip(g.iter()) {
            *a -= lr * b;
        }
    }
    Ok(())
}
