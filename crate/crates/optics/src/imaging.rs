use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, OpticsError, Result};
use crate::fft::Fft2;
use crate::field::ComplexField;
use crate::grid::GridSpec;
use crate::led::LedArray;
use crate::pupil::PupilMask;
use crate::sensor::{add_channel_noise, pixel_sample, DetectorImage, SensorSpec};

/// Unit-modulus plane wave `exp(i·2π/λ·(sx·x + sy·y))`, coordinates from the grid center.
pub fn tilt_field(grid: GridSpec, sx: f64, sy: f64) -> Result<ComplexField> {
    grid.validate()?;
    if !(sx.is_finite() && sy.is_finite()) || sx * sx + sy * sy >= 1.0 {
        return invalid(format!("direction sines ({sx}, {sy}) must have norm < 1"));
    }
    let k = 2.0 * std::f64::consts::PI / grid.wavelength;
    let n = grid.side_px;
    let mut values = Vec::with_capacity(n * n);
    for y in 0..n {
        let py = k * sy * grid.coordinate(y);
        for x in 0..n {
            values.push(Complex64::from_polar(1.0, k * sx * grid.coordinate(x) + py));
        }
    }
    Ok(ComplexField { grid, values })
}

/// Pupil seen by a sample lit by a plane wave with direction sines `(sx, sy)`:
/// the disk of radius `na / λ` centered at `-(sx, sy) / λ`, in DFT order.
///
/// Filtering the object spectrum with this mask and squaring gives the same
/// intensity as multiplying the object by the tilted wave and filtering with the
/// centered pupil, whenever that tilt is a grid frequency. Unlike the sampled
/// tilt it never aliases, even for illumination beyond the grid's Nyquist limit.
pub fn shifted_pupil(pupil: &PupilMask, sx: f64, sy: f64) -> Vec<bool> {
    let grid = pupil.grid;
    let n = grid.side_px;
    let (cx, cy) = (sx / grid.wavelength, sy / grid.wavelength);
    let cutoff = pupil.cutoff() + crate::pupil::EDGE_TOLERANCE_BINS * grid.frequency_step();
    let cutoff_sq = cutoff * cutoff;
    let mut mask = Vec::with_capacity(n * n);
    for ky in 0..n {
        let fy = grid.frequency(ky) + cy;
        for kx in 0..n {
            let fx = grid.frequency(kx) + cx;
            mask.push(fx * fx + fy * fy <= cutoff_sq);
        }
    }
    mask
}

/// `|IDFT(DFT(field) ⊙ pupil)|²` on the object grid.
pub fn coherent_intensity(field: &ComplexField, pupil: &PupilMask, fft: &Fft2) -> Result<Vec<f64>> {
    if field.grid != pupil.grid {
        return Err(OpticsError::GridMismatch(format!(
            "field {:?} vs pupil {:?}",
            field.grid, pupil.grid
        )));
    }
    filtered_intensity(field, &pupil.mask, fft)
}

fn filtered_intensity(field: &ComplexField, mask: &[bool], fft: &Fft2) -> Result<Vec<f64>> {
    if fft.side() != field.side() {
        return Err(OpticsError::GridMismatch(format!(
            "fft plan for {} but field is {}",
            fft.side(),
            field.side()
        )));
    }
    let mut spectrum = field.values.clone();
    fft.forward(&mut spectrum);
    for (v, &pass) in spectrum.iter_mut().zip(mask) {
        if !pass {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft.inverse(&mut spectrum);
    Ok(spectrum.iter().map(|v| v.norm_sqr()).collect())
}

/// Noise configuration for one sub-image: each channel owns its own stream.
pub struct Noise<'a, R: Rng + ?Sized> {
    pub reference: f64,
    pub readout: &'a mut R,
    pub sample: &'a mut R,
}

/// Renders sub-images for a fixed pupil / sensor / LED array, caching the FFT
/// plan and one shifted pupil per LED.
#[derive(Debug, Clone)]
pub struct Imager {
    pub pupil: PupilMask,
    pub sensor: SensorSpec,
    pub array: LedArray,
    fft: Fft2,
    masks: Vec<Vec<bool>>,
}

impl Imager {
    pub fn new(pupil: PupilMask, sensor: SensorSpec, array: LedArray) -> Result<Self> {
        sensor.validate()?;
        if sensor.side_px > pupil.grid.side_px {
            return Err(OpticsError::Dimension(format!(
                "sensor grid {} exceeds object grid {}",
                sensor.side_px, pupil.grid.side_px
            )));
        }
        let masks = array
            .leds
            .iter()
            .map(|led| shifted_pupil(&pupil, led.sx, led.sy))
            .collect();
        Ok(Imager {
            fft: Fft2::new(pupil.grid.side_px),
            pupil,
            sensor,
            array,
            masks,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.pupil.grid
    }

    pub fn led_count(&self) -> usize {
        self.array.len()
    }

    /// Noise-free intensity on the object grid before pixel sampling.
    pub fn object_plane_intensity(&self, object: &ComplexField, led_index: usize) -> Result<Vec<f64>> {
        let mask = self.masks.get(led_index).ok_or_else(|| {
            OpticsError::InvalidArgument(format!(
                "LED index {led_index} out of range for {} LEDs",
                self.masks.len()
            ))
        })?;
        if object.grid != self.pupil.grid {
            return Err(OpticsError::GridMismatch(format!(
                "object {:?} vs pupil {:?}",
                object.grid, self.pupil.grid
            )));
        }
        filtered_intensity(object, mask, &self.fft)
    }

    pub fn subimage<R: Rng + ?Sized>(
        &self,
        object: &ComplexField,
        led_index: usize,
        noise: Option<Noise<'_, R>>,
    ) -> Result<DetectorImage> {
        let intensity = self.object_plane_intensity(object, led_index)?;
        let mut image = pixel_sample(&intensity, &self.sensor)?;
        if let Some(noise) = noise {
            if !(noise.reference > 0.0 && noise.reference.is_finite()) {
                return invalid(format!(
                    "reference intensity must be positive, got {}",
                    noise.reference
                ));
            }
            add_channel_noise(&mut image, self.sensor.readout_sigma, noise.reference, noise.readout);
            add_channel_noise(&mut image, self.sensor.sample_sigma, noise.reference, noise.sample);
        }
        Ok(image)
    }
}

/// One-shot sub-image rendering: the object lit by one LED's plane wave,
/// low-passed by the pupil, squared, pooled, then optionally noised.
pub fn form_subimage<R: Rng + ?Sized>(
    object: &ComplexField,
    led_index: usize,
    array: &LedArray,
    pupil: &PupilMask,
    sensor: &SensorSpec,
    noise: Option<Noise<'_, R>>,
) -> Result<DetectorImage> {
    if object.grid != pupil.grid {
        return Err(OpticsError::GridMismatch(format!(
            "object {:?} vs pupil {:?}",
            object.grid, pupil.grid
        )));
    }
    let led = array.leds.get(led_index).ok_or_else(|| {
        OpticsError::InvalidArgument(format!(
            "LED index {led_index} out of range for {} LEDs",
            array.len()
        ))
    })?;
    let single = LedArray {
        na: array.na,
        leds: vec![*led],
    };
    Imager::new(pupil.clone(), *sensor, single)?.subimage(object, 0, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::led::make_led_grid_5x5;
    use crate::pupil::make_pupil;
    use rand_chacha::ChaCha8Rng;

    fn grid32() -> GridSpec {
        GridSpec::new(32, 1.25, 0.5).unwrap()
    }

    #[test]
    fn on_axis_tilt_is_flat() {
        let t = tilt_field(grid32(), 0.0, 0.0).unwrap();
        assert!(t.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn tilt_conjugate_symmetry() {
        let g = grid32();
        let a = tilt_field(g, 0.21, 0.0).unwrap();
        let b = tilt_field(g, -0.21, 0.0).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y.conj()).norm() < 1e-15);
        }
        assert!(tilt_field(g, 0.8, 0.6).is_err());
    }

    #[test]
    fn tilt_phase_advance() {
        let g = grid32();
        let s = 7.2f64.to_radians().sin();
        let t = tilt_field(g, s, 0.0).unwrap();
        let step = 2.0 * std::f64::consts::PI * s * 1.25 / 0.5;
        for x in [0usize, 7, 20] {
            let expected = step * (x as f64 - 16.0);
            let got = t.at(x, 5);
            assert!((got - Complex64::from_polar(1.0, expected)).norm() < 1e-12);
            let ratio = t.at(x + 1, 5) / got;
            assert!((ratio - Complex64::from_polar(1.0, step)).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_pupil_recenters_disk() {
        let g = grid32();
        let pupil = make_pupil(g, 0.175).unwrap();
        assert_eq!(shifted_pupil(&pupil, 0.0, 0.0), pupil.mask);
        // a shift of exactly 10 bins along +x moves the disk center to bin -10
        let m = shifted_pupil(&pupil, 10.0 * 0.025 * 0.5, 0.0);
        assert!(m[32 - 10]);
        assert!(m[16]);
        assert!(m[4]);
        assert!(!m[5]);
        assert!(m[0]);
    }

    #[test]
    fn uniform_object_on_axis_and_dark_field() {
        let g = grid32();
        let pupil = make_pupil(g, 0.175).unwrap();
        let sensor = SensorSpec::new(28, 0.0, 0.0).unwrap();
        let arr = make_led_grid_5x5(7.2f64.to_radians().sin(), 0.175).unwrap();
        let obj = ComplexField::constant(g, Complex64::new(1.0, 0.0));
        let center = form_subimage::<ChaCha8Rng>(&obj, 12, &arr, &pupil, &sensor, None).unwrap();
        assert!(center.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let dark = form_subimage::<ChaCha8Rng>(&obj, 0, &arr, &pupil, &sensor, None).unwrap();
        assert!(dark.max() < 1e-20);
        assert!(form_subimage::<ChaCha8Rng>(&obj, 25, &arr, &pupil, &sensor, None).is_err());
    }
}
