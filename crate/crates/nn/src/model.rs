use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{shape_err, NnError, Result};
use crate::gradcheck::Probe;
use crate::layers::*;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Layer widths of the two-conv / two-dense classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnnShape {
    pub side: usize,
    pub channels: usize,
    pub kernel: usize,
    pub conv1: usize,
    pub conv2: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl CnnShape {
    /// 28×28×1 input, 5×5 kernels, 32 and 64 features, 1024 hidden units.
    pub fn mnist(classes: usize) -> Self {
        CnnShape {
            side: 28,
            channels: 1,
            kernel: 5,
            conv1: 32,
            conv2: 64,
            hidden: 1024,
            classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.side == 0 || self.side % 4 != 0 {
            return Err(NnError::InvalidArgument(format!("input side {} must be a positive multiple of 4", self.side)));
        }
        if self.kernel % 2 == 0 {
            return Err(NnError::InvalidArgument(format!("kernel size {} must be odd", self.kernel)));
        }
        if [self.channels, self.conv1, self.conv2, self.hidden].contains(&0) || self.classes < 2 {
            return Err(NnError::InvalidArgument(format!("degenerate network {self:?}")));
        }
        Ok(())
    }

    /// Length of the flattened second pooling output.
    pub fn flat(&self) -> usize {
        (self.side / 4) * (self.side / 4) * self.conv2
    }

    fn group_shapes(&self) -> [Vec<usize>; 8] {
        let k = self.kernel;
        [
            vec![k, k, self.channels, self.conv1],
            vec![self.conv1],
            vec![k, k, self.conv1, self.conv2],
            vec![self.conv2],
            vec![self.flat(), self.hidden],
            vec![self.hidden],
            vec![self.hidden, self.classes],
            vec![self.classes],
        ]
    }
}

pub const GROUP_NAMES: [&str; 8] = [
    "conv1.kernel",
    "conv1.bias",
    "conv2.kernel",
    "conv2.bias",
    "dense1.weight",
    "dense1.bias",
    "readout.weight",
    "readout.bias",
];

/// Classifier parameters; gradients share the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams<T> {
    pub groups: Vec<Tensor<T>>,
}

pub type CnnGrads<T> = CnnParams<T>;

impl<T: Scalar> CnnParams<T> {
    pub fn zeros(shape: &CnnShape) -> Self {
        CnnParams {
            groups: shape.group_shapes().iter().map(|s| Tensor::zeros(s)).collect(),
        }
    }

    /// Weights from a normal with std `std` truncated at two standard deviations;
    /// biases set to `bias`.
    pub fn init<R: Rng + ?Sized>(shape: &CnnShape, std: f64, bias: f64, rng: &mut R) -> Result<Self> {
        shape.validate()?;
        let mut p = Self::zeros(shape);
        for (i, g) in p.groups.iter_mut().enumerate() {
            if i % 2 == 1 {
                g.data.iter_mut().for_each(|v| *v = T::from_f64(bias));
            } else {
                for v in &mut g.data {
                    let z = loop {
                        let z: f64 = StandardNormal.sample(rng);
                        if z.abs() <= 2.0 {
                            break z;
                        }
                    };
                    *v = T::from_f64(std * z);
                }
            }
        }
        Ok(p)
    }

    pub fn names() -> &'static [&'static str] {
        &GROUP_NAMES
    }

    pub fn count(&self) -> usize {
        self.groups.iter().map(Tensor::len).sum()
    }

    pub fn check_shapes(&self, shape: &CnnShape) -> Result<()> {
        let expected = shape.group_shapes();
        if self.groups.len() != expected.len() {
            return shape_err(format!("{} parameter groups, expected 8", self.groups.len()));
        }
        for ((g, e), name) in self.groups.iter().zip(&expected).zip(GROUP_NAMES) {
            if g.shape() != e.as_slice() {
                return shape_err(format!("{name}: shape {:?}, expected {e:?}", g.shape()));
            }
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        for (g, name) in self.groups.iter().zip(GROUP_NAMES) {
            g.check_finite(name)?;
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> CnnParams<U> {
        CnnParams {
            groups: self.groups.iter().map(Tensor::cast).collect(),
        }
    }
}

/// Intermediate values of one forward pass, consumed by [`Cnn::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    conv1: ConvCache<T>,
    pre1: Tensor<T>,
    pool1: PoolCache,
    conv2: ConvCache<T>,
    pre2: Tensor<T>,
    pool2: PoolCache,
    flat: Tensor<T>,
    pre3: Tensor<T>,
    mask: Option<Vec<T>>,
    hidden: Tensor<T>,
    pub logits: Tensor<T>,
}

impl<T: Scalar> ForwardCache<T> {
    /// Hash of every ReLU sign and max-pool winner. Two inputs with equal
    /// fingerprints lie in the same linear region of the network.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for pre in [&self.pre1, &self.pre2, &self.pre3] {
            let mut word = 0u64;
            for (i, v) in pre.data.iter().enumerate() {
                word = (word << 1) | (*v > T::zero()) as u64;
                if i % 64 == 63 {
                    h.write_u64(word);
                    word = 0;
                }
            }
            h.write_u64(word);
        }
        for p in [&self.pool1, &self.pool2] {
            for &i in &p.argmax {
                h.write_u32(i);
            }
        }
        h.finish()
    }
}

/// Conv(5×5) → ReLU → pool → conv(5×5) → ReLU → pool → dense → ReLU → dropout → readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Cnn<T> {
    pub shape: CnnShape,
    pub params: CnnParams<T>,
}

impl<T: Scalar> Cnn<T> {
    pub fn new(shape: CnnShape, params: CnnParams<T>) -> Result<Self> {
        shape.validate()?;
        params.check_shapes(&shape)?;
        Ok(Cnn { shape, params })
    }

    pub fn init<R: Rng + ?Sized>(shape: CnnShape, rng: &mut R) -> Result<Self> {
        let params = CnnParams::init(&shape, 0.1, 0.1, rng)?;
        Cnn::new(shape, params)
    }

    /// Input tensor shape for a batch of `n`.
    pub fn input_shape(&self, n: usize) -> [usize; 4] {
        [n, self.shape.side, self.shape.side, self.shape.channels]
    }

    /// Forward pass. `dropout` is an inverted-dropout mask over the hidden layer
    /// (`n · hidden` entries); `None` is evaluation mode.
    pub fn forward(&self, input: &Tensor<T>, dropout: Option<Vec<T>>) -> Result<ForwardCache<T>> {
        let n = input.shape().first().copied().unwrap_or(0);
        if n == 0 {
            return Err(NnError::EmptyBatch);
        }
        if input.shape() != self.input_shape(n) {
            return shape_err(format!("input {:?}, expected {:?}", input.shape(), self.input_shape(n)));
        }
        let g = &self.params.groups;
        let (pre1, conv1) = conv2d_forward(input, &g[0], &g[1])?;
        let (p1, pool1) = maxpool2x2_forward(&relu_forward(&pre1))?;
        let (pre2, conv2) = conv2d_forward(&p1, &g[2], &g[3])?;
        let (p2, pool2) = maxpool2x2_forward(&relu_forward(&pre2))?;
        let flat = p2.reshape(&[n, self.shape.flat()])?;
        let pre3 = dense_forward(&flat, &g[4], &g[5])?;
        let mut hidden = relu_forward(&pre3);
        if let Some(mask) = &dropout {
            hidden = dropout_forward(&hidden, mask)?;
        }
        let logits = dense_forward(&hidden, &g[6], &g[7])?;
        logits.check_finite("logits")?;
        Ok(ForwardCache {
            conv1,
            pre1,
            pool1,
            conv2,
            pre2,
            pool2,
            flat,
            pre3,
            mask: dropout,
            hidden,
            logits,
        })
    }

    /// Evaluation-mode logits.
    pub fn logits(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.forward(input, None)?.logits)
    }

    /// Gradients of a scalar loss given `d_logits`; also returns the input gradient.
    pub fn backward(&self, cache: &ForwardCache<T>, d_logits: &Tensor<T>) -> Result<(CnnGrads<T>, Tensor<T>)> {
        let g = &self.params.groups;
        let n = cache.logits.shape()[0];
        let (mut d_hidden, d_w4, d_b4) = dense_backward(&cache.hidden, &g[6], d_logits)?;
        if let Some(mask) = &cache.mask {
            d_hidden = dropout_backward(&d_hidden, mask)?;
        }
        let d_pre3 = relu_backward(&cache.pre3, &d_hidden)?;
        let (d_flat, d_w3, d_b3) = dense_backward(&cache.flat, &g[4], &d_pre3)?;
        let q = self.shape.side / 4;
        let d_p2 = d_flat.reshape(&[n, q, q, self.shape.conv2])?;
        let d_pre2 = relu_backward(&cache.pre2, &maxpool2x2_backward(&cache.pool2, &d_p2)?)?;
        let (d_p1, d_k2, d_b2) = conv2d_backward(&cache.conv2, &g[2], &d_pre2)?;
        let d_pre1 = relu_backward(&cache.pre1, &maxpool2x2_backward(&cache.pool1, &d_p1)?)?;
        let (d_input, d_k1, d_b1) = conv2d_backward(&cache.conv1, &g[0], &d_pre1)?;
        Ok((
            CnnParams {
                groups: vec![d_k1, d_b1, d_k2, d_b2, d_w3, d_b3, d_w4, d_b4],
            },
            d_input,
        ))
    }

    /// Mean cross-entropy, parameter gradients and input gradient for one batch.
    pub fn loss_and_grad(
        &self,
        input: &Tensor<T>,
        labels: &[u32],
        dropout: Option<Vec<T>>,
    ) -> Result<(T, CnnGrads<T>, Tensor<T>)> {
        let cache = self.forward(input, dropout)?;
        let (loss, d_logits) = softmax_cross_entropy(&cache.logits, labels)?;
        let (grads, d_input) = self.backward(&cache, &d_logits)?;
        Ok((loss, grads, d_input))
    }

    /// Loss and activation fingerprint, for finite-difference probes.
    pub fn probe(&self, input: &Tensor<T>, labels: &[u32]) -> Result<Probe> {
        let cache = self.forward(input, None)?;
        let (loss, _) = softmax_cross_entropy(&cache.logits, labels)?;
        Ok(Probe {
            loss: loss.as_f64(),
            pattern: cache.fingerprint(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mnist_shapes() {
        let s = CnnShape::mnist(10);
        assert_eq!(s.flat(), 3136);
        let p = CnnParams::<f32>::zeros(&s);
        assert_eq!(p.groups[4].shape(), &[3136, 1024]);
        assert_eq!(p.groups[6].shape(), &[1024, 10]);
        assert_eq!(p.count(), 800 + 32 + 51200 + 64 + 3136 * 1024 + 1024 + 10240 + 10);
        assert!(CnnShape { side: 30, ..s }.validate().is_err());
    }

    #[test]
    fn init_is_truncated() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = CnnShape { side: 8, conv1: 4, conv2: 4, hidden: 16, ..CnnShape::mnist(3) };
        let p = CnnParams::<f64>::init(&s, 0.1, 0.1, &mut rng).unwrap();
        for (i, g) in p.groups.iter().enumerate() {
            if i % 2 == 1 {
                assert!(g.data.iter().all(|&v| v == 0.1));
            } else {
                assert!(g.data.iter().all(|&v| v.abs() <= 0.2));
            }
        }
    }

    #[test]
    fn eval_forward_is_repeatable() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = CnnShape { side: 8, conv1: 3, conv2: 4, hidden: 6, ..CnnShape::mnist(3) };
        let net = Cnn::<f32>::init(s, &mut rng).unwrap();
        let x = Tensor::new(&[2, 8, 8, 1], (0..128).map(|i| (i as f32 * 0.37).sin()).collect()).unwrap();
        assert_eq!(net.logits(&x).unwrap(), net.logits(&x).unwrap());
        assert!(net.logits(&Tensor::zeros(&[2, 8, 7, 1])).is_err());
    }
}
