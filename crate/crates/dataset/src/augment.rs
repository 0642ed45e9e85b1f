//! Geometric and photometric augmentation of sub-image stacks.
//!
//! One draw of the transform parameters is shared by all L planes of a stack,
//! since they are views of the same physical sample.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::stack::SubImageStack;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticSpec {
    /// Standard deviation (px) of the Gaussian smoothing the displacement field.
    pub sigma: f64,
    /// Scale (px) applied to the smoothed field.
    pub amplitude: f64,
}

impl Default for ElasticSpec {
    fn default() -> Self {
        ElasticSpec {
            sigma: 4.0,
            amplitude: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugmentSpec {
    /// Random multiple of 90°.
    pub rotate: bool,
    /// 3×3 Gaussian blur with this standard deviation (px).
    pub blur_sigma: Option<f64>,
    pub elastic: Option<ElasticSpec>,
    /// Additive Gaussian noise standard deviation, in image units.
    pub noise_sigma: Option<f64>,
}

impl AugmentSpec {
    pub fn is_identity(&self) -> bool {
        !self.rotate && self.blur_sigma.is_none() && self.elastic.is_none() && self.noise_sigma.is_none()
    }
}

/// Rotates a square plane by `k` quarter turns counterclockwise.
pub fn rotate_plane<T: Copy>(plane: &[T], side: usize, k: usize) -> Vec<T> {
    let mut cur = plane.to_vec();
    for _ in 0..k % 4 {
        let mut next = cur.clone();
        for y in 0..side {
            for x in 0..side {
                next[y * side + x] = cur[x * side + (side - 1 - y)];
            }
        }
        cur = next;
    }
    cur
}

/// Normalized 3-tap Gaussian weights for offsets -1, 0, 1.
pub fn blur_kernel(sigma: f64) -> [f64; 3] {
    let side = (-1.0 / (2.0 * sigma * sigma)).exp();
    let total = 1.0 + 2.0 * side;
    [side / total, 1.0 / total, side / total]
}

/// Half-sample symmetric reflection: index -1 maps to 0, n maps to n-1.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

fn separable(image: &Image, kernel: &[f64]) -> Image {
    let r = (kernel.len() / 2) as isize;
    let (h, w) = (image.height, image.width);
    let rows = Image::from_fn(h, w, |y, x| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wt)| wt * image.at(y, reflect(x as isize + k as isize - r, w)))
            .sum()
    });
    Image::from_fn(h, w, |y, x| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wt)| wt * rows.at(reflect(y as isize + k as isize - r, h), x))
            .sum()
    })
}

/// 3×3 Gaussian blur with reflective borders. The kernel sums to one and the
/// reflection maps every pixel's weight back into the image, so the mean is kept.
pub fn blur_image(image: &Image, sigma: f64) -> Image {
    separable(image, &blur_kernel(sigma))
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Smoothed random displacement field (dy, dx) in pixels.
pub fn elastic_field<R: Rng + ?Sized>(h: usize, w: usize, spec: &ElasticSpec, rng: &mut R) -> (Image, Image) {
    let kernel = gaussian_kernel(spec.sigma);
    let mut draw = || {
        let raw = Image {
            height: h,
            width: w,
            data: (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let mut smooth = separable(&raw, &kernel);
        for v in smooth.data.iter_mut() {
            *v *= spec.amplitude;
        }
        smooth
    };
    let dy = draw();
    let dx = draw();
    (dy, dx)
}

/// Bilinear resampling at `(y + dy, x + dx)` with clamped edges.
pub fn warp(image: &Image, dy: &Image, dx: &Image) -> Image {
    Image::from_fn(image.height, image.width, |y, x| {
        let sy = y as f64 + dy.at(y, x);
        let sx = x as f64 + dx.at(y, x);
        let (y0, x0) = (sy.floor(), sx.floor());
        let (ty, tx) = (sy - y0, sx - x0);
        let (y0, x0) = (y0 as isize, x0 as isize);
        let top = (1.0 - tx) * image.clamped(y0, x0) + tx * image.clamped(y0, x0 + 1);
        let bottom = (1.0 - tx) * image.clamped(y0 + 1, x0) + tx * image.clamped(y0 + 1, x0 + 1);
        (1.0 - ty) * top + ty * bottom
    })
}

fn plane_image(stack: &SubImageStack, led: usize) -> Image {
    Image {
        height: stack.height,
        width: stack.width,
        data: stack.plane(led).iter().map(|&v| v as f64).collect(),
    }
}

pub fn augment<R: Rng + ?Sized>(stack: &SubImageStack, spec: &AugmentSpec, rng: &mut R) -> Result<SubImageStack> {
    if spec.is_identity() {
        return Ok(stack.clone());
    }
    if spec.rotate && stack.height != stack.width {
        return invalid(format!(
            "rotation needs square planes, got {}×{}",
            stack.height, stack.width
        ));
    }
    if let Some(s) = spec.blur_sigma {
        if !(s > 0.0) {
            return invalid(format!("blur sigma {s} must be > 0"));
        }
    }
    if let Some(e) = spec.elastic {
        if !(e.sigma > 0.0 && e.amplitude >= 0.0) {
            return invalid(format!("bad elastic parameters {e:?}"));
        }
    }

    let turns = if spec.rotate { rng.gen_range(0..4usize) } else { 0 };
    let field = spec
        .elastic
        .map(|e| elastic_field(stack.height, stack.width, &e, rng));

    let mut out = stack.clone();
    for led in 0..stack.led_count {
        let mut img = plane_image(stack, led);
        if turns > 0 {
            img.data = rotate_plane(&img.data, img.width, turns);
        }
        if let Some((dy, dx)) = &field {
            img = warp(&img, dy, dx);
        }
        if let Some(s) = spec.blur_sigma {
            img = blur_image(&img, s);
        }
        if let Some(s) = spec.noise_sigma {
            for v in img.data.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += s * z;
            }
        }
        for (dst, src) in out.plane_mut(led).iter_mut().zip(&img.data) {
            *dst = *src as f32;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stack(l: usize, side: usize) -> SubImageStack {
        let images = (0..l * side * side).map(|i| ((i * 37) % 101) as f32 / 7.0).collect();
        SubImageStack::new(images, l, side, side, 1).unwrap()
    }

    #[test]
    fn identity_spec_is_exact() {
        let s = stack(3, 6);
        let out = augment(&s, &AugmentSpec::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let s = stack(1, 7);
        let mut p = s.plane(0).to_vec();
        for _ in 0..4 {
            p = rotate_plane(&p, 7, 1);
        }
        assert_eq!(p, s.plane(0));
        assert_eq!(rotate_plane(s.plane(0), 7, 4), s.plane(0));
        // one quarter turn moves the top-right corner to the top-left
        let r = rotate_plane(s.plane(0), 7, 1);
        assert_eq!(r[0], s.plane(0)[6]);
    }

    #[test]
    fn blur_keeps_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for sigma in [0.5, 0.8, 2.0] {
            let img = Image::new(13, 9, (0..117).map(|_| rng.gen_range(0.0..5.0)).collect()).unwrap();
            let out = blur_image(&img, sigma);
            assert!((out.mean() - img.mean()).abs() <= 1e-10 * img.mean());
        }
        let k = blur_kernel(1.0);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(k[1] > k[0]);
    }

    #[test]
    fn rotation_needs_square() {
        let s = SubImageStack::new(vec![0.0; 12], 1, 3, 4, 0).unwrap();
        let spec = AugmentSpec {
            rotate: true,
            ..Default::default()
        };
        assert!(augment(&s, &spec, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn zero_amplitude_warp_is_identity() {
        let img = Image::from_fn(8, 8, |y, x| (y * 8 + x) as f64);
        let spec = ElasticSpec {
            sigma: 2.0,
            amplitude: 0.0,
        };
        let (dy, dx) = elastic_field(8, 8, &spec, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(warp(&img, &dy, &dx), img);
    }
}
