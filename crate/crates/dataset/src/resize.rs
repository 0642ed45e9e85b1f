use crate::error::{DataError, Result};
use crate::image::Image;

/// Catmull-Rom weights for taps at offsets -1, 0, 1, 2 from the base sample.
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Source coordinate with corners aligned: output 0 and out-1 land exactly on
/// input 0 and in-1.
fn source_coord(o: usize, input: usize, output: usize) -> f64 {
    if output == 1 {
        (input - 1) as f64 / 2.0
    } else {
        (o * (input - 1)) as f64 / (output - 1) as f64
    }
}

fn check(image: &Image, out_h: usize, out_w: usize, min: usize) -> Result<()> {
    if image.height < min || image.width < min {
        return Err(DataError::Dimension(format!(
            "resize needs at least {min}×{min} input, got {}×{}",
            image.height, image.width
        )));
    }
    if out_h == 0 || out_w == 0 {
        return Err(DataError::Dimension("resize output must be non-empty".into()));
    }
    Ok(())
}

/// Bicubic (Catmull-Rom) resampling with clamped edges.
pub fn resize_cubic(image: &Image, out_h: usize, out_w: usize) -> Result<Image> {
    check(image, out_h, out_w, 4)?;
    if out_h == image.height && out_w == image.width {
        return Ok(image.clone());
    }
    let taps = |o: usize, input: usize, output: usize| {
        let s = source_coord(o, input, output);
        let base = s.floor();
        (base as isize, catmull_rom(s - base))
    };
    let xs: Vec<_> = (0..out_w).map(|o| taps(o, image.width, out_w)).collect();
    let ys: Vec<_> = (0..out_h).map(|o| taps(o, image.height, out_h)).collect();
    Ok(Image::from_fn(out_h, out_w, |oy, ox| {
        let (by, wy) = ys[oy];
        let (bx, wx) = xs[ox];
        let mut acc = 0.0;
        for (j, wyj) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (i, wxi) in wx.iter().enumerate() {
                row += wxi * image.clamped(by - 1 + j as isize, bx - 1 + i as isize);
            }
            acc += wyj * row;
        }
        acc
    }))
}

/// Bilinear resampling on the same corner-aligned coordinate map.
pub fn resize_bilinear(image: &Image, out_h: usize, out_w: usize) -> Result<Image> {
    check(image, out_h, out_w, 2)?;
    Ok(Image::from_fn(out_h, out_w, |oy, ox| {
        let sy = source_coord(oy, image.height, out_h);
        let sx = source_coord(ox, image.width, out_w);
        let (y0, x0) = (sy.floor() as isize, sx.floor() as isize);
        let (ty, tx) = (sy - y0 as f64, sx - x0 as f64);
        let top = (1.0 - tx) * image.clamped(y0, x0) + tx * image.clamped(y0, x0 + 1);
        let bottom = (1.0 - tx) * image.clamped(y0 + 1, x0) + tx * image.clamped(y0 + 1, x0 + 1);
        (1.0 - ty) * top + ty * bottom
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |y, x| ((y * 7 + x * 13) as f64 * 0.917).sin())
    }

    #[test]
    fn same_size_is_identity() {
        let img = random_image(9, 7);
        assert_eq!(resize_cubic(&img, 9, 7).unwrap(), img);
    }

    #[test]
    fn constants_survive() {
        let img = Image::from_fn(10, 12, |_, _| 0.37);
        for (h, w) in [(28, 28), (5, 3), (13, 40)] {
            let out = resize_cubic(&img, h, w).unwrap();
            assert!(out.data.iter().all(|v| (v - 0.37).abs() < 1e-14));
        }
    }

    #[test]
    fn quadratic_ramp_is_reproduced() {
        let quad = |y: f64, x: f64| 0.3 * x * x - 0.2 * x * y + 0.1 * y * y + x - 2.0 * y + 0.5;
        let img = Image::from_fn(8, 8, |y, x| quad(y as f64, x as f64));
        let out = resize_cubic(&img, 5, 5).unwrap();
        for oy in 0..5 {
            for ox in 0..5 {
                let (sy, sx) = (oy as f64 * 7.0 / 4.0, ox as f64 * 7.0 / 4.0);
                assert!((out.at(oy, ox) - quad(sy, sx)).abs() < 1e-10);
            }
        }
        let random = random_image(8, 8);
        let cubic = resize_cubic(&random, 5, 5).unwrap();
        let linear = resize_bilinear(&random, 5, 5).unwrap();
        let diff: f64 = cubic.data.iter().zip(&linear.data).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff > 1e-3);
    }

    #[test]
    fn rejects_tiny_inputs() {
        assert!(resize_cubic(&Image::zeros(3, 8), 4, 4).is_err());
        assert!(resize_cubic(&Image::zeros(8, 8), 0, 4).is_err());
    }
}
