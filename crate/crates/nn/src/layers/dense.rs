use crate::error::{shape_err, Result};
use crate::scalar::{matmul, Scalar};
use crate::tensor::Tensor;

/// `y = x·W + b` for `x: [n, in]`, `W: [in, out]`. Any leading shape of `x` is
/// flattened to `[n, in]`.
pub fn dense_forward<T: Scalar>(x: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (fan_in, fan_out) = match *weight.shape() {
        [a, b] => (a, b),
        _ => return shape_err(format!("dense weight {:?}", weight.shape())),
    };
    let n = x.shape()[0];
    if n == 0 || x.len() != n * fan_in {
        return shape_err(format!("dense input {:?} for {fan_in} features", x.shape()));
    }
    if bias.shape() != [fan_out] {
        return shape_err(format!("dense bias {:?}", bias.shape()));
    }
    let mut out = Vec::with_capacity(n * fan_out);
    for _ in 0..n {
        out.extend_from_slice(&bias.data);
    }
    matmul(n, fan_in, fan_out, &x.data, false, &weight.data, false, &mut out, true);
    Tensor::new(&[n, fan_out], out)
}

/// Returns `(d_x, d_weight, d_bias)`; `d_x` has the shape of `x`.
pub fn dense_backward<T: Scalar>(
    x: &Tensor<T>,
    weight: &Tensor<T>,
    d_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (fan_in, fan_out) = (weight.shape()[0], weight.shape()[1]);
    let n = x.shape()[0];
    if d_out.shape() != [n, fan_out] {
        return shape_err(format!("dense grad {:?}", d_out.shape()));
    }
    let mut d_w = vec![T::zero(); fan_in * fan_out];
    matmul(fan_in, n, fan_out, &x.data, true, &d_out.data, false, &mut d_w, false);
    let mut d_b = vec![T::zero(); fan_out];
    for r in d_out.data.chunks_exact(fan_out) {
        for (b, &g) in d_b.iter_mut().zip(r) {
            *b += g;
        }
    }
    let mut d_x = vec![T::zero(); n * fan_in];
    matmul(n, fan_out, fan_in, &d_out.data, false, &weight.data, true, &mut d_x, false);
    Ok((
        Tensor::new(x.shape(), d_x)?,
        Tensor::new(&[fan_in, fan_out], d_w)?,
        Tensor::new(&[fan_out], d_b)?,
    ))
}
