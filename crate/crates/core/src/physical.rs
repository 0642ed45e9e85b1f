use dpcnn_nn::Scalar;

use crate::error::{CoreError, Result};

fn check(planes: &[impl Sized], led_count: usize, w_len: usize) -> Result<usize> {
    if led_count == 0 || planes.len() % led_count != 0 {
        return Err(CoreError::Shape(format!("{} values do not split into {led_count} planes", planes.len())));
    }
    if w_len != led_count {
        return Err(CoreError::Shape(format!("{w_len} weights for {led_count} sub-images")));
    }
    Ok(planes.len() / led_count)
}

/// `x'[p] = Σ_l w_l · planes[l][p]` for a `[led][pixel]` stack.
pub fn physical_layer<T: Scalar>(planes: &[T], led_count: usize, w: &[T]) -> Result<Vec<T>> {
    let n = check(planes, led_count, w.len())?;
    let mut out = vec![T::zero(); n];
    for (plane, &wl) in planes.chunks_exact(n).zip(w) {
        for (o, &v) in out.iter_mut().zip(plane) {
            *o += wl * v;
        }
    }
    Ok(out)
}

/// `∂loss/∂w_l = ⟨∂loss/∂x', planes[l]⟩`.
pub fn physical_layer_backward<T: Scalar>(planes: &[T], led_count: usize, d_out: &[T]) -> Result<Vec<T>> {
    let n = check(planes, led_count, led_count)?;
    if d_out.len() != n {
        return Err(CoreError::Shape(format!("gradient has {} pixels, planes {n}", d_out.len())));
    }
    Ok(planes
        .chunks_exact(n)
        .map(|plane| plane.iter().zip(d_out).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
        .collect())
}

/// `∂loss/∂planes[l] = w_l · ∂loss/∂x'`.
pub fn physical_layer_stack_grad<T: Scalar>(w: &[T], d_out: &[T]) -> Vec<T> {
    w.iter().flat_map(|&wl| d_out.iter().map(move |&g| wl * g)).collect()
}
