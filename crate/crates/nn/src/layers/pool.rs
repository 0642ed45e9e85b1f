use crate::error::{shape_err, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Flat input index of each output's maximum.
#[derive(Debug, Clone)]
pub struct PoolCache {
    pub argmax: Vec<u32>,
    input_shape: [usize; 4],
}

/// 2×2 max-pool with stride 2; odd trailing rows/columns are dropped.
/// Ties resolve to the first element in (row, column) order.
pub fn maxpool2x2_forward<T: Scalar>(input: &Tensor<T>) -> Result<(Tensor<T>, PoolCache)> {
    let [n, h, w, c] = match *input.shape() {
        [a, b, c, d] => [a, b, c, d],
        _ => return shape_err(format!("pool input {:?}", input.shape())),
    };
    let (oh, ow) = (h / 2, w / 2);
    if oh == 0 || ow == 0 {
        return shape_err(format!("pool input {h}x{w} too small"));
    }
    let mut out = Vec::with_capacity(n * oh * ow * c);
    let mut argmax = Vec::with_capacity(n * oh * ow * c);
    for b in 0..n {
        for y in 0..oh {
            for x in 0..ow {
                let corners = [
                    ((b * h + 2 * y) * w + 2 * x) * c,
                    ((b * h + 2 * y) * w + 2 * x + 1) * c,
                    ((b * h + 2 * y + 1) * w + 2 * x) * c,
                    ((b * h + 2 * y + 1) * w + 2 * x + 1) * c,
                ];
                for ch in 0..c {
                    let mut best = corners[0] + ch;
                    for &k in &corners[1..] {
                        if input.data[k + ch] > input.data[best] {
                            best = k + ch;
                        }
                    }
                    out.push(input.data[best]);
                    argmax.push(best as u32);
                }
            }
        }
    }
    Ok((
        Tensor::new(&[n, oh, ow, c], out)?,
        PoolCache {
            argmax,
            input_shape: [n, h, w, c],
        },
    ))
}

pub fn maxpool2x2_backward<T: Scalar>(cache: &PoolCache, d_out: &Tensor<T>) -> Result<Tensor<T>> {
    if d_out.len() != cache.argmax.len() {
        return shape_err(format!("pool grad has {} values, expected {}", d_out.len(), cache.argmax.len()));
    }
    let mut d_in = Tensor::zeros(&cache.input_shape);
    for (&i, &g) in cache.argmax.iter().zip(&d_out.data) {
        d_in.data[i as usize] += g;
    }
    Ok(d_in)
}
