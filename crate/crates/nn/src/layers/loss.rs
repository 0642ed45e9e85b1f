use crate::error::{shape_err, NnError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Row-wise softmax of `[n, classes]` logits, via max subtraction.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, c) = match *logits.shape() {
        [a, b] => (a, b),
        _ => return shape_err(format!("logits {:?}", logits.shape())),
    };
    let mut out = logits.data.clone();
    for row in out.chunks_exact_mut(c) {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
    Tensor::new(&[n, c], out)
}

/// Mean cross-entropy and its gradient with respect to the logits.
pub fn softmax_cross_entropy<T: Scalar>(logits: &Tensor<T>, labels: &[u32]) -> Result<(T, Tensor<T>)> {
    let (n, c) = match *logits.shape() {
        [a, b] => (a, b),
        _ => return shape_err(format!("logits {:?}", logits.shape())),
    };
    if n == 0 {
        return Err(NnError::EmptyBatch);
    }
    if labels.len() != n {
        return shape_err(format!("{} labels for {n} rows", labels.len()));
    }
    let mut grad = Vec::with_capacity(n * c);
    let mut total = 0.0f64;
    let inv_n = 1.0 / n as f64;
    for (row, &label) in logits.data.chunks_exact(c).zip(labels) {
        let label = label as usize;
        if label >= c {
            return Err(NnError::InvalidArgument(format!("label {label} with {c} classes")));
        }
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v.as_f64()));
        let sum: f64 = row.iter().map(|&v| (v.as_f64() - max).exp()).sum();
        let lse = max + sum.ln();
        total += lse - row[label].as_f64();
        for (j, &v) in row.iter().enumerate() {
            let p = (v.as_f64() - lse).exp();
            let onehot = if j == label { 1.0 } else { 0.0 };
            grad.push(T::from_f64((p - onehot) * inv_n));
        }
    }
    Ok((T::from_f64(total * inv_n), Tensor::new(&[n, c], grad)?))
}
