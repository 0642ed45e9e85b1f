use dpcnn_optics::{Imager, Noise};

use crate::error::{DataError, Result};
use crate::object::ThinObject;
use crate::rng::{keyed_rng, CHANNEL_READOUT, CHANNEL_SAMPLE, DOMAIN_NOISE};

/// The L per-LED detector images of one object, stored `[led][y][x]` as f32.
#[derive(Debug, Clone, PartialEq)]
pub struct SubImageStack {
    pub images: Vec<f32>,
    pub led_count: usize,
    pub height: usize,
    pub width: usize,
    pub label: u32,
    pub object_id: u64,
    /// Global seed the noise streams of this stack were keyed from.
    pub seed: u64,
}

impl SubImageStack {
    pub fn new(
        images: Vec<f32>,
        led_count: usize,
        height: usize,
        width: usize,
        label: u32,
    ) -> Result<Self> {
        if images.len() != led_count * height * width {
            return Err(DataError::Dimension(format!(
                "{} values for a {led_count}×{height}×{width} stack",
                images.len()
            )));
        }
        if images.iter().any(|v| !v.is_finite()) {
            return Err(DataError::InvalidArgument("stack contains non-finite values".into()));
        }
        Ok(SubImageStack {
            images,
            led_count,
            height,
            width,
            label,
            object_id: 0,
            seed: 0,
        })
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn plane(&self, led: usize) -> &[f32] {
        let n = self.plane_len();
        &self.images[led * n..(led + 1) * n]
    }

    pub fn plane_mut(&mut self, led: usize) -> &mut [f32] {
        let n = self.plane_len();
        &mut self.images[led * n..(led + 1) * n]
    }

    pub fn plane_mean(&self, led: usize) -> f64 {
        let p = self.plane(led);
        p.iter().map(|&v| v as f64).sum::<f64>() / p.len() as f64
    }
}

/// Noise settings for a stack: per-(object, LED, channel) streams keyed by `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackNoise {
    pub reference: f64,
    pub seed: u64,
}

/// Renders every LED's sub-image of `object`. With `noise`, the readout and
/// sample-plane channels of LED `l` draw from streams keyed by
/// `(seed, object_id, l, channel)`, so output is independent of call order.
pub fn render_stack(
    object: &ThinObject,
    imager: &Imager,
    object_id: u64,
    noise: Option<StackNoise>,
) -> Result<SubImageStack> {
    let field = object.transmittance();
    let side = imager.sensor.side_px;
    let leds = imager.led_count();
    let mut images = Vec::with_capacity(leds * side * side);
    for l in 0..leds {
        let image = match noise {
            Some(n) => {
                let mut readout = keyed_rng(n.seed, &[DOMAIN_NOISE, object_id, l as u64, CHANNEL_READOUT]);
                let mut sample = keyed_rng(n.seed, &[DOMAIN_NOISE, object_id, l as u64, CHANNEL_SAMPLE]);
                imager.subimage(
                    &field,
                    l,
                    Some(Noise {
                        reference: n.reference,
                        readout: &mut readout,
                        sample: &mut sample,
                    }),
                )?
            }
            None => imager.subimage::<rand_chacha::ChaCha8Rng>(&field, l, None)?,
        };
        images.extend(image.values.iter().map(|&v| v as f32));
    }
    let mut stack = SubImageStack::new(images, leds, side, side, object.label)?;
    stack.object_id = object_id;
    stack.seed = noise.map_or(0, |n| n.seed);
    Ok(stack)
}
