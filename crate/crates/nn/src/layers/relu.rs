use crate::error::{shape_err, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// In-place ReLU; the unmodified input is the backward cache.
pub fn relu_forward<T: Scalar>(pre: &Tensor<T>) -> Tensor<T> {
    let mut out = pre.clone();
    for v in &mut out.data {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    out
}

/// Gradient passes where the pre-activation was strictly positive.
pub fn relu_backward<T: Scalar>(pre: &Tensor<T>, d_out: &Tensor<T>) -> Result<Tensor<T>> {
    if pre.shape() != d_out.shape() {
        return shape_err(format!("relu grad {:?} vs {:?}", d_out.shape(), pre.shape()));
    }
    let data = pre
        .data
        .iter()
        .zip(&d_out.data)
        .map(|(&p, &g)| if p > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::new(pre.shape(), data)
}
