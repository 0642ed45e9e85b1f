use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Led {
    /// Direction sines of the illuminating plane wave.
    pub sx: f64,
    pub sy: f64,
    pub bright_field: bool,
    /// 0 for the on-axis LED, increasing outward.
    pub ring: u32,
}

impl Led {
    pub fn sine_norm(&self) -> f64 {
        self.sx.hypot(self.sy)
    }

    /// Transverse wavevector (rad/µm) for wavelength `lambda` in µm.
    pub fn wavevector(&self, lambda: f64) -> (f64, f64) {
        let k = 2.0 * std::f64::consts::PI / lambda;
        (k * self.sx, k * self.sy)
    }
}

/// Ordered LED list together with the objective NA used to classify each LED.
#[derive(Debug, Clone, PartialEq)]
pub struct LedArray {
    pub na: f64,
    pub leds: Vec<Led>,
}

impl LedArray {
    /// Builds an array from raw `(sx, sy, ring)` triples, deriving the bright-field flags.
    pub fn from_positions(positions: &[(f64, f64, u32)], na: f64) -> Result<Self> {
        if !(na > 0.0 && na < 1.0) {
            return invalid(format!("numerical aperture must lie in (0, 1), got {na}"));
        }
        let mut leds = Vec::with_capacity(positions.len());
        for &(sx, sy, ring) in positions {
            if !(sx.is_finite() && sy.is_finite()) || sx * sx + sy * sy >= 1.0 {
                return invalid(format!("direction sines ({sx}, {sy}) must have norm < 1"));
            }
            leds.push(Led {
                sx,
                sy,
                bright_field: is_bright_field(sx, sy, na),
                ring,
            });
        }
        Ok(LedArray { na, leds })
    }

    pub fn len(&self) -> usize {
        self.leds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leds.is_empty()
    }

    /// Index of the LED closest to the optical axis.
    pub fn center_index(&self) -> Option<usize> {
        self.leds
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.sine_norm().total_cmp(&b.1.sine_norm()))
            .map(|(i, _)| i)
    }

    pub fn ring_count(&self) -> usize {
        self.leds.iter().map(|l| l.ring as usize + 1).max().unwrap_or(0)
    }
}

/// Norms within a relative 1e-12 of the aperture count as bright field, so
/// ring LEDs placed exactly on the cutoff do not flip on rounding.
fn is_bright_field(sx: f64, sy: f64, na: f64) -> bool {
    sx.hypot(sy) <= na * (1.0 + 1e-12)
}

/// 5×5 grid uniform in direction-sine space, row-major from (-2p, -2p).
pub fn make_led_grid_5x5(angular_pitch_sine: f64, na: f64) -> Result<LedArray> {
    let p = angular_pitch_sine;
    if !(p > 0.0 && 2.0 * p < 1.0) {
        return invalid(format!("LED pitch sine must satisfy 0 < p < 0.5, got {p}"));
    }
    let mut positions = Vec::with_capacity(25);
    for b in -2i32..=2 {
        for a in -2i32..=2 {
            let ring = a.unsigned_abs().max(b.unsigned_abs());
            positions.push((a as f64 * p, b as f64 * p, ring));
        }
    }
    LedArray::from_positions(&positions, na)
}

/// Concentric rings with LEDs spread evenly in angle, counterclockwise from +x.
pub fn make_led_rings(ring_sines: &[f64], counts: &[usize], na: f64) -> Result<LedArray> {
    if ring_sines.len() != counts.len() {
        return invalid(format!(
            "{} ring radii but {} ring counts",
            ring_sines.len(),
            counts.len()
        ));
    }
    let mut positions = Vec::new();
    for (ring, (&radius, &count)) in ring_sines.iter().zip(counts).enumerate() {
        if count == 0 {
            return invalid(format!("ring {ring} has zero LEDs"));
        }
        if !(0.0..1.0).contains(&radius) {
            return invalid(format!("ring {ring} sine {radius} outside [0, 1)"));
        }
        for i in 0..count {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
            let (s, c) = theta.sin_cos();
            positions.push((radius * c, radius * s, ring as u32));
        }
    }
    LedArray::from_positions(&positions, na)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_angles() {
        let p = 7.2f64.to_radians().sin();
        let arr = make_led_grid_5x5(p, 0.175).unwrap();
        assert_eq!(arr.len(), 25);
        assert_eq!(arr.center_index(), Some(12));
        let first = arr.leds[13];
        assert!((first.sx.asin().to_degrees() - 7.2).abs() < 1e-12);
        let second = arr.leds[14];
        assert!((second.sx.asin().to_degrees() - 14.5).abs() < 0.05);
        assert_eq!(second.ring, 2);
    }

    #[test]
    fn bright_field_flags() {
        let p = 7.2f64.to_radians().sin();
        let arr = make_led_grid_5x5(p, 0.175).unwrap();
        for (i, led) in arr.leds.iter().enumerate() {
            let (a, b) = ((i % 5) as f64 - 2.0, (i / 5) as f64 - 2.0);
            let norm = (a * a + b * b).sqrt() * p;
            assert_eq!(led.bright_field, norm <= 0.175, "led {i}");
        }
        let bright: Vec<usize> = (0..25).filter(|&i| arr.leds[i].bright_field).collect();
        assert_eq!(bright, vec![7, 11, 12, 13, 17]);
        // center is bright for any aperture
        let narrow = make_led_grid_5x5(p, 1e-3).unwrap();
        assert!(narrow.leds[12].bright_field);
    }

    #[test]
    fn grid_pitch_bounds() {
        assert!(make_led_grid_5x5(0.0, 0.1).is_err());
        assert!(make_led_grid_5x5(0.5, 0.1).is_err());
    }

    #[test]
    fn rings() {
        let single = make_led_rings(&[0.0], &[1], 0.175).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!((single.leds[0].sx, single.leds[0].sy), (0.0, 0.0));

        let quad = make_led_rings(&[0.3], &[4], 0.175).unwrap();
        let expected = [(0.3, 0.0), (0.0, 0.3), (-0.3, 0.0), (0.0, -0.3)];
        for (led, (x, y)) in quad.leds.iter().zip(expected) {
            assert!((led.sx - x).abs() < 1e-15 && (led.sy - y).abs() < 1e-15);
        }

        let ring29 = make_led_rings(&[0.1, 0.3, 0.5, 0.7], &[1, 8, 8, 12], 0.5).unwrap();
        assert_eq!(ring29.len(), 29);
        let dark: Vec<usize> = (0..29).filter(|&i| !ring29.leds[i].bright_field).collect();
        assert_eq!(dark, (17..29).collect::<Vec<_>>());

        assert!(make_led_rings(&[0.1, 0.2], &[1], 0.5).is_err());
        assert!(make_led_rings(&[1.0], &[3], 0.5).is_err());
    }
}
