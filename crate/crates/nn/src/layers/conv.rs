use crate::error::{shape_err, Result};
use crate::scalar::{matmul, Scalar};
use crate::tensor::Tensor;

/// Saved im2col matrix; rows are output pixels `(n, y, x)`, columns `(dy, dx, ci)`.
#[derive(Debug, Clone)]
pub struct ConvCache<T> {
    cols: Vec<T>,
    input_shape: [usize; 4],
    kh: usize,
    kw: usize,
}

fn dims4(t: &[usize], what: &str) -> Result<[usize; 4]> {
    match *t {
        [a, b, c, d] => Ok([a, b, c, d]),
        _ => shape_err(format!("{what} must be rank 4, got {t:?}")),
    }
}

fn im2col<T: Scalar>(input: &[T], [n, h, w, c]: [usize; 4], kh: usize, kw: usize) -> Vec<T> {
    let (py, px) = (kh / 2, kw / 2);
    let row = kh * kw * c;
    let mut cols = vec![T::zero(); n * h * w * row];
    for b in 0..n {
        for y in 0..h {
            for x in 0..w {
                let base = ((b * h + y) * w + x) * row;
                for dy in 0..kh {
                    let sy = y + dy;
                    if sy < py || sy - py >= h {
                        continue;
                    }
                    let sy = sy - py;
                    for dx in 0..kw {
                        let sx = x + dx;
                        if sx < px || sx - px >= w {
                            continue;
                        }
                        let src = ((b * h + sy) * w + (sx - px)) * c;
                        let dst = base + (dy * kw + dx) * c;
                        cols[dst..dst + c].copy_from_slice(&input[src..src + c]);
                    }
                }
            }
        }
    }
    cols
}

fn col2im<T: Scalar>(cols: &[T], [n, h, w, c]: [usize; 4], kh: usize, kw: usize) -> Vec<T> {
    let (py, px) = (kh / 2, kw / 2);
    let row = kh * kw * c;
    let mut out = vec![T::zero(); n * h * w * c];
    for b in 0..n {
        for y in 0..h {
            for x in 0..w {
                let base = ((b * h + y) * w + x) * row;
                for dy in 0..kh {
                    let sy = y + dy;
                    if sy < py || sy - py >= h {
                        continue;
                    }
                    let sy = sy - py;
                    for dx in 0..kw {
                        let sx = x + dx;
                        if sx < px || sx - px >= w {
                            continue;
                        }
                        let dst = ((b * h + sy) * w + (sx - px)) * c;
                        let src = base + (dy * kw + dx) * c;
                        for (o, &v) in out[dst..dst + c].iter_mut().zip(&cols[src..src + c]) {
                            *o += v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Stride-1 "same" cross-correlation with zero padding (odd kernel sizes).
pub fn conv2d_forward<T: Scalar>(
    input: &Tensor<T>,
    kernel: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<(Tensor<T>, ConvCache<T>)> {
    let [n, h, w, c] = dims4(input.shape(), "conv input")?;
    let [kh, kw, kc, co] = dims4(kernel.shape(), "conv kernel")?;
    if kc != c {
        return shape_err(format!("kernel expects {kc} input channels, input has {c}"));
    }
    if kh % 2 == 0 || kw % 2 == 0 {
        return shape_err(format!("same padding needs odd kernel, got {kh}x{kw}"));
    }
    if bias.shape() != [co] {
        return shape_err(format!("bias shape {:?}, expected [{co}]", bias.shape()));
    }
    let shape = [n, h, w, c];
    let cols = im2col(&input.data, shape, kh, kw);
    let rows = n * h * w;
    let mut out = Vec::with_capacity(rows * co);
    for _ in 0..rows {
        out.extend_from_slice(&bias.data);
    }
    matmul(rows, kh * kw * c, co, &cols, false, &kernel.data, false, &mut out, true);
    let cache = ConvCache {
        cols,
        input_shape: shape,
        kh,
        kw,
    };
    Ok((Tensor::new(&[n, h, w, co], out)?, cache))
}

/// Returns `(d_input, d_kernel, d_bias)`.
pub fn conv2d_backward<T: Scalar>(
    cache: &ConvCache<T>,
    kernel: &Tensor<T>,
    d_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let [n, h, w, c] = cache.input_shape;
    let (kh, kw) = (cache.kh, cache.kw);
    let co = kernel.shape()[3];
    if d_out.shape() != [n, h, w, co] {
        return shape_err(format!("conv grad shape {:?}", d_out.shape()));
    }
    let rows = n * h * w;
    let k = kh * kw * c;
    let mut d_kernel = vec![T::zero(); k * co];
    matmul(k, rows, co, &cache.cols, true, &d_out.data, false, &mut d_kernel, false);
    let mut d_bias = vec![T::zero(); co];
    for r in d_out.data.chunks_exact(co) {
        for (b, &g) in d_bias.iter_mut().zip(r) {
            *b += g;
        }
    }
    let mut d_cols = vec![T::zero(); rows * k];
    matmul(rows, co, k, &d_out.data, false, &kernel.data, true, &mut d_cols, false);
    let d_input = col2im(&d_cols, cache.input_shape, kh, kw);
    Ok((
        Tensor::new(&[n, h, w, c], d_input)?,
        Tensor::new(&[kh, kw, c, co], d_kernel)?,
        Tensor::new(&[co], d_bias)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, h: usize, w: usize, c: usize) -> Tensor<f64> {
        let data = (0..n * h * w * c).map(|i| ((i * 37) % 23) as f64 - 11.0).collect();
        Tensor::new(&[n, h, w, c], data).unwrap()
    }

    #[test]
    fn identity_kernel_reproduces_input() {
        let input = ramp(2, 6, 7, 1);
        let mut k = Tensor::zeros(&[5, 5, 1, 1]);
        k.data[2 * 5 + 2] = 1.0;
        let (out, _) = conv2d_forward(&input, &k, &Tensor::zeros(&[1])).unwrap();
        assert_eq!(out.data, input.data);
    }

    #[test]
    fn ones_kernel_sums_zero_padded_window() {
        let (h, w) = (6, 5);
        let input = ramp(1, h, w, 1);
        let k = Tensor::filled(&[5, 5, 1, 1], 1.0);
        let (out, _) = conv2d_forward(&input, &k, &Tensor::filled(&[1], 0.5)).unwrap();
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut s = 0.5;
                for yy in y - 2..=y + 2 {
                    for xx in x - 2..=x + 2 {
                        if (0..h as isize).contains(&yy) && (0..w as isize).contains(&xx) {
                            s += input.data[(yy * w as isize + xx) as usize];
                        }
                    }
                }
                assert_eq!(out.data[(y * w as isize + x) as usize], s);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let input = ramp(1, 4, 4, 2);
        assert!(conv2d_forward(&input, &Tensor::zeros(&[5, 5, 1, 3]), &Tensor::zeros(&[3])).is_err());
        assert!(conv2d_forward(&input, &Tensor::zeros(&[4, 4, 2, 3]), &Tensor::zeros(&[3])).is_err());
        assert!(conv2d_forward(&input, &Tensor::zeros(&[5, 5, 2, 3]), &Tensor::zeros(&[2])).is_err());
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), y> == <x, col2im(y)>
        let shape = [2, 5, 4, 3];
        let x = ramp(2, 5, 4, 3).data;
        let cols = im2col(&x, shape, 5, 3);
        let y: Vec<f64> = (0..cols.len()).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let lhs: f64 = cols.iter().zip(&y).map(|(a, b)| a * b).sum();
        let back = col2im(&y, shape, 5, 3);
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert_eq!(lhs, rhs);
    }
}
