//! Synthetic handwriting-like glyphs for offline runs.
//!
//! Sixteen stroke templates (0-9, A-F) in a unit box are warped by a smooth
//! random field and a random affine map, then rasterized with a 1-pixel
//! anti-aliased edge into a 20-pixel box centered by mass on the output canvas.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::image::Image;

pub const MAX_CLASSES: usize = 16;

type Pt = (f64, f64);
type Stroke = Vec<Pt>;

fn line(a: Pt, b: Pt) -> Stroke {
    (0..=8)
        .map(|i| {
            let t = i as f64 / 8.0;
            (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
        })
        .collect()
}

fn bezier(p0: Pt, p1: Pt, p2: Pt) -> Stroke {
    (0..=16)
        .map(|i| {
            let t = i as f64 / 16.0;
            let u = 1.0 - t;
            (
                u * u * p0.0 + 2.0 * u * t * p1.0 + t * t * p2.0,
                u * u * p0.1 + 2.0 * u * t * p1.1 + t * t * p2.1,
            )
        })
        .collect()
}

/// Elliptical arc; angles in degrees with y pointing down.
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, from: f64, to: f64) -> Stroke {
    let steps = (((to - from).abs() / 7.5).ceil() as usize).max(2);
    (0..=steps)
        .map(|i| {
            let a = (from + (to - from) * i as f64 / steps as f64).to_radians();
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn template<R: Rng + ?Sized>(class: usize, rng: &mut R) -> Vec<Stroke> {
    match class {
        0 => vec![arc(0.5, 0.5, 0.34, 0.47, 0.0, 360.0)],
        1 => {
            let mut s = vec![line((0.55, 0.03), (0.48, 0.97))];
            if rng.gen_bool(0.5) {
                s.push(line((0.32, 0.22), (0.55, 0.03)));
            }
            s
        }
        2 => vec![
            arc(0.5, 0.3, 0.32, 0.27, 190.0, 380.0),
            line((0.8, 0.39), (0.15, 0.97)),
            line((0.15, 0.97), (0.88, 0.97)),
        ],
        3 => vec![
            arc(0.48, 0.27, 0.3, 0.23, 200.0, 450.0),
            arc(0.48, 0.72, 0.34, 0.25, 270.0, 520.0),
        ],
        4 => vec![
            line((0.68, 0.97), (0.68, 0.03)),
            line((0.68, 0.03), (0.1, 0.68)),
            line((0.1, 0.68), (0.92, 0.68)),
        ],
        5 => vec![
            line((0.82, 0.03), (0.25, 0.03)),
            line((0.25, 0.03), (0.2, 0.45)),
            arc(0.5, 0.68, 0.33, 0.28, 215.0, 500.0),
        ],
        6 => vec![
            bezier((0.75, 0.03), (0.22, 0.2), (0.2, 0.7)),
            arc(0.5, 0.72, 0.3, 0.25, 0.0, 360.0),
        ],
        7 => vec![line((0.1, 0.04), (0.9, 0.04)), line((0.9, 0.04), (0.38, 0.97))],
        8 => vec![
            arc(0.5, 0.26, 0.25, 0.22, 0.0, 360.0),
            arc(0.5, 0.73, 0.31, 0.25, 0.0, 360.0),
        ],
        9 => vec![
            arc(0.5, 0.3, 0.3, 0.26, 0.0, 360.0),
            bezier((0.8, 0.3), (0.8, 0.7), (0.68, 0.97)),
        ],
        10 => vec![
            line((0.08, 0.97), (0.5, 0.03)),
            line((0.5, 0.03), (0.92, 0.97)),
            line((0.27, 0.6), (0.73, 0.6)),
        ],
        11 => vec![
            line((0.2, 0.03), (0.2, 0.97)),
            arc(0.2, 0.26, 0.5, 0.23, 270.0, 450.0),
            arc(0.2, 0.73, 0.58, 0.24, 270.0, 450.0),
        ],
        12 => vec![arc(0.55, 0.5, 0.4, 0.47, 45.0, 315.0)],
        13 => vec![
            line((0.2, 0.03), (0.2, 0.97)),
            arc(0.2, 0.5, 0.62, 0.47, 270.0, 450.0),
        ],
        14 => vec![
            line((0.8, 0.03), (0.2, 0.03)),
            line((0.2, 0.03), (0.2, 0.97)),
            line((0.2, 0.97), (0.82, 0.97)),
            line((0.2, 0.5), (0.7, 0.5)),
        ],
        _ => vec![
            line((0.8, 0.03), (0.2, 0.03)),
            line((0.2, 0.03), (0.2, 0.97)),
            line((0.2, 0.5), (0.7, 0.5)),
        ],
    }
}

fn segment_distance(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Randomized glyph renderer.
#[derive(Debug, Clone, Copy)]
pub struct GlyphGenerator {
    pub classes: usize,
    /// Output canvas side in pixels.
    pub size: usize,
}

impl GlyphGenerator {
    pub fn new(classes: usize, size: usize) -> Result<Self> {
        if classes == 0 || classes > MAX_CLASSES {
            return invalid(format!("glyph classes must be in 1..={MAX_CLASSES}, got {classes}"));
        }
        if size < 8 {
            return invalid(format!("glyph canvas {size} too small"));
        }
        Ok(GlyphGenerator { classes, size })
    }

    /// Draws a label uniformly and renders it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Image, u32) {
        let class = rng.gen_range(0..self.classes);
        (self.render(class, rng), class as u32)
    }

    pub fn render<R: Rng + ?Sized>(&self, class: usize, rng: &mut R) -> Image {
        let strokes = template(class, rng);

        // smooth warp in template space
        let waves: Vec<(f64, f64, f64, f64, f64)> = (0..3)
            .map(|_| {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                (
                    rng.gen_range(0.6..1.6),
                    theta.cos(),
                    theta.sin(),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(0.0..0.045),
                )
            })
            .collect();
        let warp_axis: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();

        let box_px = self.size as f64 * 20.0 / 28.0;
        let tilt = Normal::new(0.0, 9f64.to_radians())
            .unwrap()
            .sample(rng)
            .clamp(-0.35, 0.35);
        let shear = rng.gen_range(-0.3..0.3);
        let sx = box_px * rng.gen_range(0.6..1.05);
        let sy = box_px * rng.gen_range(0.88..1.05);
        let (sin_t, cos_t) = tilt.sin_cos();
        let thickness = rng.gen_range(1.3..3.0) * self.size as f64 / 28.0;

        let mut transformed: Vec<Stroke> = strokes
            .into_iter()
            .map(|stroke| {
                stroke
                    .into_iter()
                    .map(|(x, y)| {
                        let (mut wx, mut wy) = (x, y);
                        for (&(f, cx, cy, phase, amp), &axis) in waves.iter().zip(&warp_axis) {
                            let s = (std::f64::consts::TAU * f * (x * cx + y * cy) + phase).sin();
                            wx += amp * s * axis.cos();
                            wy += amp * s * axis.sin();
                        }
                        let (u, v) = ((wx - 0.5) * sx, (wy - 0.5) * sy);
                        let u = u + shear * v;
                        (u * cos_t - v * sin_t, u * sin_t + v * cos_t)
                    })
                    .collect()
            })
            .collect();

        // center of mass of the stroke samples onto the canvas center, plus jitter
        let (mut mx, mut my, mut count) = (0.0, 0.0, 0.0);
        for p in transformed.iter().flatten() {
            mx += p.0;
            my += p.1;
            count += 1.0;
        }
        let jitter = self.size as f64 / 28.0;
        let cx = self.size as f64 / 2.0 - mx / count + rng.gen_range(-jitter..jitter);
        let cy = self.size as f64 / 2.0 - my / count + rng.gen_range(-jitter..jitter);
        for p in transformed.iter_mut().flatten() {
            p.0 += cx;
            p.1 += cy;
        }

        let half = 0.5 * thickness;
        Image::from_fn(self.size, self.size, |y, x| {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let mut d = f64::INFINITY;
            for stroke in &transformed {
                for w in stroke.windows(2) {
                    d = d.min(segment_distance(p, w[0], w[1]));
                }
            }
            (half + 0.5 - d).clamp(0.0, 1.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn glyphs_are_normalized_and_nonempty() {
        let gen = GlyphGenerator::new(16, 28).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for class in 0..16 {
            let img = gen.render(class, &mut rng);
            assert_eq!((img.height, img.width), (28, 28));
            assert!(img.data.iter().all(|v| (0.0..=1.0).contains(v)));
            let ink: f64 = img.data.iter().sum();
            assert!(ink > 20.0, "class {class} has too little ink: {ink}");
            // border stays mostly empty like centered handwriting
            let border: f64 = (0..28).map(|i| img.at(0, i) + img.at(27, i)).sum();
            assert!(border < 3.0, "class {class} touches the border");
        }
    }

    #[test]
    fn deterministic_given_rng() {
        let gen = GlyphGenerator::new(10, 28).unwrap();
        let a = gen.sample(&mut ChaCha8Rng::seed_from_u64(99));
        let b = gen.sample(&mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
        assert!(GlyphGenerator::new(17, 28).is_err());
        assert!(GlyphGenerator::new(0, 28).is_err());
    }
}
