use dpcnn_data::rng::keyed_rng;
use dpcnn_data::{DatasetHeader, SubImageStack};
use dpcnn_nn::layers::{dropout_mask, softmax_cross_entropy};
use dpcnn_nn::{adam_step, sgd_step, AdamConfig, AdamState, Cnn, CnnGrads, CnnParams, CnnShape, NnError, Probe, Scalar, Tensor};
use dpcnn_optics::LedArray;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoreError, Result};
use crate::evaluate::evaluate;
use crate::patterns::{baseline_pattern, IlluminationWeights, Strategy};
use crate::physical::{physical_layer, physical_layer_backward};
use crate::result::TrialResult;

const DOMAIN_CNN_INIT: u64 = 16;
const DOMAIN_W_INIT: u64 = 17;
const DOMAIN_BATCH: u64 = 18;
const DOMAIN_DROPOUT: u64 = 19;
const DOMAIN_PATTERN: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub step_size: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub keep_prob: f64,
    pub seed: u64,
    /// Noise level of the data the run trains on; recorded, not applied.
    pub noise_sigma: f64,
    pub deterministic: bool,
    /// Constant multiplying the physical-layer output before the classifier.
    pub input_gain: f64,
    /// LED weights start i.i.d. uniform in `(-h, h)`.
    pub w_init_half_width: f64,
    pub weight_init_std: f64,
    pub bias_init: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 10_000,
            batch_size: 50,
            step_size: 1e-4,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            keep_prob: 0.5,
            seed: 0,
            noise_sigma: 0.0,
            deterministic: true,
            input_gain: 1.0,
            w_init_half_width: 0.5,
            weight_init_std: 0.1,
            bias_init: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_size == 0 {
            return invalid("iterations and batch size must be at least 1");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return invalid(format!("step size {} must be positive", self.step_size));
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return invalid(format!("keep probability {} not in (0, 1]", self.keep_prob));
        }
        if !(self.input_gain > 0.0 && self.input_gain.is_finite()) {
            return invalid(format!("input gain {} must be positive", self.input_gain));
        }
        if !(self.w_init_half_width >= 0.0 && self.weight_init_std > 0.0) {
            return invalid("initialization scales must be non-negative");
        }
        self.adam().validate()?;
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            step_size: self.step_size,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Gain that maps the mean all-LEDs-on image to unit mean under the uniform
/// `1/L` pattern: `L / reference`.
pub fn default_input_gain(header: &DatasetHeader) -> f64 {
    header.led_count as f64 / header.noise_reference
}

/// LED weights plus classifier, in one element type.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel<T> {
    pub w: Vec<T>,
    pub cnn: Cnn<T>,
    pub gain: T,
}

impl<T: Scalar> JointModel<T> {
    /// Physical-layer images as a `[n, h, w, 1]` tensor, and the stacked planes.
    pub fn input(&self, stacks: &[&SubImageStack]) -> Result<(Tensor<T>, Vec<T>)> {
        let first = stacks.first().ok_or(CoreError::Empty("batch"))?;
        let (l, h, wd) = (first.led_count, first.height, first.width);
        let side = self.cnn.shape.side;
        if h != side || wd != side {
            return Err(CoreError::Shape(format!("{h}×{wd} sub-images for a {side}×{side} classifier")));
        }
        let mut planes = Vec::with_capacity(stacks.len() * l * h * wd);
        let mut x = Vec::with_capacity(stacks.len() * h * wd);
        for s in stacks {
            if (s.led_count, s.height, s.width) != (l, h, wd) {
                return Err(CoreError::Shape("stacks in a batch differ in shape".into()));
            }
            let start = planes.len();
            planes.extend(s.images.iter().map(|&v| T::from_f32(v)));
            let img = physical_layer(&planes[start..], l, &self.w)?;
            x.extend(img.into_iter().map(|v| v * self.gain));
        }
        Ok((Tensor::new(&[stacks.len(), h, wd, 1], x)?, planes))
    }
}

/// Mean cross-entropy with gradients for the LED weights and the classifier.
pub fn joint_loss_and_grad<T: Scalar>(
    model: &JointModel<T>,
    stacks: &[&SubImageStack],
    dropout: Option<Vec<T>>,
) -> Result<(T, Vec<T>, CnnGrads<T>)> {
    let (x, planes) = model.input(stacks)?;
    let labels: Vec<u32> = stacks.iter().map(|s| s.label).collect();
    let (loss, grads, d_x) = model.cnn.loss_and_grad(&x, &labels, dropout)?;
    let l = model.w.len();
    let p = d_x.len() / stacks.len();
    let per = planes.len() / stacks.len();
    let mut d_w = vec![T::zero(); l];
    for (n, d) in d_x.data.chunks_exact(p).enumerate() {
        let g = physical_layer_backward(&planes[n * per..(n + 1) * per], l, d)?;
        for (a, b) in d_w.iter_mut().zip(g) {
            *a += b * model.gain;
        }
    }
    Ok((loss, d_w, grads))
}

impl<T: Scalar> JointModel<T> {
    /// Evaluation-mode loss and activation fingerprint.
    pub fn probe(&self, stacks: &[&SubImageStack]) -> Result<Probe> {
        let (x, _) = self.input(stacks)?;
        let labels: Vec<u32> = stacks.iter().map(|s| s.label).collect();
        Ok(self.cnn.probe(&x, &labels)?)
    }

    pub fn logits(&self, stacks: &[&SubImageStack]) -> Result<Tensor<T>> {
        let (x, _) = self.input(stacks)?;
        Ok(self.cnn.logits(&x)?)
    }

    /// Mean loss without dropout.
    pub fn loss(&self, stacks: &[&SubImageStack]) -> Result<T> {
        let labels: Vec<u32> = stacks.iter().map(|s| s.label).collect();
        Ok(softmax_cross_entropy(&self.logits(stacks)?, &labels)?.0)
    }
}

/// Output of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub w: Vec<f64>,
    pub params: CnnParams<f32>,
    pub shape: CnnShape,
    pub gain: f64,
    pub loss_trace: Vec<f32>,
}

impl Trained {
    pub fn model(&self) -> Result<JointModel<f32>> {
        Ok(JointModel {
            w: self.w.iter().map(|&v| v as f32).collect(),
            cnn: Cnn::new(self.shape, self.params.clone())?,
            gain: self.gain as f32,
        })
    }
}

fn check_set(train: &[SubImageStack], classes: usize) -> Result<(usize, usize)> {
    let first = train.first().ok_or(CoreError::Empty("training set"))?;
    let l = first.led_count;
    if let Some(bad) = train.iter().find(|s| s.led_count != l || s.height != first.height || s.width != first.width) {
        return Err(CoreError::Shape(format!("object {} has a different stack shape", bad.object_id)));
    }
    if let Some(bad) = train.iter().find(|s| s.label as usize >= classes) {
        return invalid(format!("label {} with {classes} classes", bad.label));
    }
    Ok((l, first.height))
}

/// Sets flush-to-zero and denormals-are-zero for the current thread while alive.
/// Subnormal f32 values (tiny Adam moments, dead activations) otherwise slow
/// arithmetic by an order of magnitude; results stay deterministic.
struct FlushDenormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

impl FlushDenormals {
    #[allow(deprecated)]
    fn enable() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
            // SAFETY: only the FTZ (bit 15) and DAZ (bit 6) flags change
            unsafe {
                let saved = _mm_getcsr();
                _mm_setcsr(saved | 0x8040);
                FlushDenormals { saved }
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        FlushDenormals {}
    }
}

impl Drop for FlushDenormals {
    #[allow(deprecated)]
    fn drop(&mut self) {
        #[cfg(target_arch = "x86_64")]
        // SAFETY: restores the control word read in `enable`
        unsafe {
            std::arch::x86_64::_mm_setcsr(self.saved)
        }
    }
}

fn train_loop(train: &[SubImageStack], classes: usize, w0: Vec<f64>, learn_w: bool, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    let (l, side) = check_set(train, classes)?;
    let _ftz = FlushDenormals::enable();
    if w0.len() != l {
        return Err(CoreError::Shape(format!("{} weights for {l}-LED stacks", w0.len())));
    }
    let shape = CnnShape { side, ..CnnShape::mnist(classes) };
    let mut init_rng = keyed_rng(config.seed, &[DOMAIN_CNN_INIT]);
    let params = CnnParams::<f32>::init(&shape, config.weight_init_std, config.bias_init, &mut init_rng)?;
    let mut model = JointModel {
        w: w0.iter().map(|&v| v as f32).collect(),
        cnn: Cnn::new(shape, params)?,
        gain: config.input_gain as f32,
    };
    let mut sizes: Vec<usize> = model.cnn.params.groups.iter().map(|g| g.len()).collect();
    if learn_w {
        sizes.insert(0, l);
    }
    let mut adam = AdamState::<f32>::new(config.adam(), &sizes)?;
    let mut dropout_rng = keyed_rng(config.seed, &[DOMAIN_DROPOUT]);
    let batch = config.batch_size.min(train.len());
    let mut order: Vec<usize> = Vec::new();
    let mut cursor = usize::MAX;
    let mut epoch = 0u64;
    let mut trace = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        if cursor.saturating_add(batch) > order.len() {
            order = (0..train.len()).collect();
            order.shuffle(&mut keyed_rng(config.seed, &[DOMAIN_BATCH, epoch]));
            epoch += 1;
            cursor = 0;
        }
        let stacks: Vec<&SubImageStack> = order[cursor..cursor + batch].iter().map(|&i| &train[i]).collect();
        cursor += batch;
        let mask = (config.keep_prob < 1.0)
            .then(|| dropout_mask::<f32, _>(batch * shape.hidden, config.keep_prob, &mut dropout_rng))
            .transpose()?;
        let abort = || CoreError::NonFiniteLoss {
            iteration: it,
            epoch: epoch - 1,
            batch: cursor / batch - 1,
        };
        let (loss, d_w, grads) = match joint_loss_and_grad(&model, &stacks, mask) {
            Err(CoreError::Nn(NnError::NonFinite(_))) => return Err(abort()),
            r => r?,
        };
        if !loss.is_finite() || d_w.iter().any(|v| !v.is_finite()) {
            return Err(abort());
        }
        trace.push(loss);
        let mut params: Vec<&mut [f32]> = Vec::with_capacity(sizes.len());
        let mut gs: Vec<&[f32]> = Vec::with_capacity(sizes.len());
        if learn_w {
            params.push(&mut model.w);
            gs.push(&d_w);
        }
        for (p, g) in model.cnn.params.groups.iter_mut().zip(&grads.groups) {
            params.push(&mut p.data);
            gs.push(&g.data);
        }
        match config.optimizer {
            OptimizerKind::Adam => adam_step(&mut params, &gs, &mut adam)?,
            OptimizerKind::Sgd => sgd_step(&mut params, &gs, config.step_size)?,
        }
    }
    let w = if learn_w { model.w.iter().map(|&v| v as f64).collect() } else { w0 };
    Ok(Trained {
        w,
        params: model.cnn.params,
        shape,
        gain: config.input_gain,
        loss_trace: trace,
    })
}

/// Random LED weights, then joint Adam on LED weights and classifier.
pub fn train_dpcnn(train: &[SubImageStack], classes: usize, config: &TrainConfig) -> Result<Trained> {
    let l = train.first().ok_or(CoreError::Empty("training set"))?.led_count;
    let mut rng = keyed_rng(config.seed, &[DOMAIN_W_INIT]);
    let h = config.w_init_half_width;
    let w0 = (0..l).map(|_| if h > 0.0 { rng.gen_range(-h..h) } else { 0.0 }).collect();
    train_loop(train, classes, w0, true, config)
}

/// Classifier-only training; the returned weights are `w_fixed` itself.
pub fn train_fixed(train: &[SubImageStack], w_fixed: &IlluminationWeights, classes: usize, config: &TrainConfig) -> Result<Trained> {
    train_loop(train, classes, w_fixed.w.clone(), false, config)
}

/// Train one strategy and evaluate it on `test`.
pub fn run_trial(
    train: &[SubImageStack],
    test: &[SubImageStack],
    classes: usize,
    array: &LedArray,
    strategy: Strategy,
    config: &TrainConfig,
) -> Result<TrialResult> {
    let trained = match strategy.baseline() {
        Some(kind) => {
            let w = baseline_pattern(kind, array, &mut keyed_rng(config.seed, &[DOMAIN_PATTERN]))?;
            train_fixed(train, &w, classes, config)?
        }
        None => train_dpcnn(train, classes, config)?,
    };
    let eval = evaluate(&trained.model()?, test, classes)?;
    Ok(TrialResult::new(strategy, config.clone(), trained, eval))
}
