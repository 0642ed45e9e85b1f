use rand::Rng;

use crate::error::{shape_err, NnError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Inverted-dropout mask: each entry is `1/keep` with probability `keep`, else 0.
pub fn dropout_mask<T: Scalar, R: Rng + ?Sized>(len: usize, keep: f64, rng: &mut R) -> Result<Vec<T>> {
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(NnError::InvalidArgument(format!("keep probability {keep} not in (0, 1]")));
    }
    let scale = T::from_f64(1.0 / keep);
    Ok((0..len)
        .map(|_| if rng.gen::<f64>() < keep { scale } else { T::zero() })
        .collect())
}

pub fn dropout_forward<T: Scalar>(x: &Tensor<T>, mask: &[T]) -> Result<Tensor<T>> {
    if mask.len() != x.len() {
        return shape_err(format!("dropout mask {} vs {}", mask.len(), x.len()));
    }
    Tensor::new(x.shape(), x.data.iter().zip(mask).map(|(&a, &m)| a * m).collect())
}

pub fn dropout_backward<T: Scalar>(d_out: &Tensor<T>, mask: &[T]) -> Result<Tensor<T>> {
    dropout_forward(d_out, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn mask_preserves_expectation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m: Vec<f64> = dropout_mask(200_000, 0.5, &mut rng).unwrap();
        let mean = m.iter().sum::<f64>() / m.len() as f64;
        assert!((mean - 1.0).abs() < 0.01);
        assert!(m.iter().all(|&v| v == 0.0 || v == 2.0));
        assert!(dropout_mask::<f64, _>(3, 0.0, &mut rng).is_err());
    }
}
