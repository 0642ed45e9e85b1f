use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, OpticsError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    pub side_px: usize,
    /// Readout noise standard deviation as a fraction of the reference intensity.
    pub readout_sigma: f64,
    /// Sample-plane noise standard deviation, same units.
    pub sample_sigma: f64,
}

impl SensorSpec {
    pub fn new(side_px: usize, readout_sigma: f64, sample_sigma: f64) -> Result<Self> {
        let s = SensorSpec {
            side_px,
            readout_sigma,
            sample_sigma,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.side_px == 0 {
            return invalid("sensor needs at least one pixel");
        }
        if !(self.readout_sigma >= 0.0 && self.readout_sigma.is_finite()) {
            return invalid(format!("readout sigma {} must be >= 0", self.readout_sigma));
        }
        if !(self.sample_sigma >= 0.0 && self.sample_sigma.is_finite()) {
            return invalid(format!("sample sigma {} must be >= 0", self.sample_sigma));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.readout_sigma == 0.0 && self.sample_sigma == 0.0
    }
}

/// Real image on the detector grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorImage {
    pub side_px: usize,
    pub values: Vec<f64>,
}

impl DetectorImage {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Row `o` holds the fraction of output pixel `o` covered by each input pixel.
/// Integer arithmetic in units of 1/(in·out) keeps the overlaps exact.
fn overlap_weights(input: usize, output: usize) -> Vec<Vec<(usize, f64)>> {
    (0..output)
        .map(|o| {
            let (lo, hi) = (o * input, (o + 1) * input);
            let first = lo / output;
            let last = (hi - 1) / output;
            (first..=last)
                .filter_map(|j| {
                    let (a, b) = (j * output, (j + 1) * output);
                    let overlap = hi.min(b).saturating_sub(lo.max(a));
                    (overlap > 0).then(|| (j, overlap as f64 / input as f64))
                })
                .collect()
        })
        .collect()
}

/// Area-weighted pooling of a square object-grid image onto the sensor grid.
pub fn pixel_sample(intensity: &[f64], sensor: &SensorSpec) -> Result<DetectorImage> {
    sensor.validate()?;
    let input = (intensity.len() as f64).sqrt().round() as usize;
    if input * input != intensity.len() {
        return Err(OpticsError::Dimension(format!(
            "intensity of {} samples is not square",
            intensity.len()
        )));
    }
    let out = sensor.side_px;
    if out > input {
        return Err(OpticsError::Dimension(format!(
            "sensor grid {out} exceeds object grid {input}"
        )));
    }
    if out == input {
        return Ok(DetectorImage {
            side_px: out,
            values: intensity.to_vec(),
        });
    }
    let weights = overlap_weights(input, out);
    // pool along x, then along y
    let mut rows = vec![0.0; input * out];
    for y in 0..input {
        let src = &intensity[y * input..(y + 1) * input];
        for (ox, w) in weights.iter().enumerate() {
            rows[y * out + ox] = w.iter().map(|&(j, wt)| wt * src[j]).sum();
        }
    }
    let mut values = vec![0.0; out * out];
    for (oy, w) in weights.iter().enumerate() {
        for ox in 0..out {
            values[oy * out + ox] = w.iter().map(|&(j, wt)| wt * rows[j * out + ox]).sum();
        }
    }
    Ok(DetectorImage { side_px: out, values })
}

/// Adds independent N(0, (sigma·reference)²) draws to every pixel. A zero sigma
/// leaves the image untouched and consumes no randomness.
pub fn add_channel_noise<R: Rng + ?Sized>(
    image: &mut DetectorImage,
    sigma: f64,
    reference: f64,
    rng: &mut R,
) {
    if sigma == 0.0 {
        return;
    }
    let scale = sigma * reference;
    for v in image.values.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += scale * z;
    }
}

/// Readout plus sample-plane noise from a single stream (readout drawn first).
pub fn add_noise<R: Rng + ?Sized>(
    image: &DetectorImage,
    sensor: &SensorSpec,
    reference: f64,
    rng: &mut R,
) -> Result<DetectorImage> {
    sensor.validate()?;
    if !(reference > 0.0 && reference.is_finite()) {
        return invalid(format!("reference intensity must be positive, got {reference}"));
    }
    let mut out = image.clone();
    add_channel_noise(&mut out, sensor.readout_sigma, reference, rng);
    add_channel_noise(&mut out, sensor.sample_sigma, reference, rng);
    Ok(out)
}
