use std::path::PathBuf;

use dpcnn_optics::{make_led_grid_5x5, make_led_rings, make_pupil, GridSpec, Imager, LedArray, SensorSpec};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::augment::ElasticSpec;
use crate::container::{Dataset, DatasetHeader};
use crate::error::{invalid, Result};
use crate::glyphs::GlyphGenerator;
use crate::idx;
use crate::image::Image;
use crate::object::{digit_to_phase_object, PhaseObjectParams, ThinObject};
use crate::resize::resize_cubic;
use crate::rng::{keyed_rng, DOMAIN_GLYPH, DOMAIN_SUBSET};
use crate::stack::{render_stack, StackNoise, SubImageStack};

/// Side of the digit bitmaps placed on the object grid.
pub const DIGIT_SIDE: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub enum LedLayout {
    /// 5×5 grid with the given direction-sine pitch.
    Grid5x5 { pitch_sine: f64 },
    Rings { sines: Vec<f64>, counts: Vec<usize> },
}

impl LedLayout {
    pub fn build(&self, na: f64) -> Result<LedArray> {
        Ok(match self {
            LedLayout::Grid5x5 { pitch_sine } => make_led_grid_5x5(*pitch_sine, na)?,
            LedLayout::Rings { sines, counts } => make_led_rings(sines, counts, na)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DigitSource {
    Synthetic,
    Idx { images: PathBuf, labels: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub count: usize,
    pub classes: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub na: f64,
    pub layout: LedLayout,
    pub sensor: SensorSpec,
    pub params: PhaseObjectParams,
    pub source: DigitSource,
    pub elastic: ElasticSpec,
    /// Objects used to calibrate the noise reference intensity.
    pub calibration_count: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            count: 6000,
            classes: 10,
            seed: 0,
            grid: GridSpec {
                side_px: 32,
                pitch: 1.25,
                wavelength: 0.5,
            },
            na: 0.175,
            layout: LedLayout::Grid5x5 {
                pitch_sine: 7.2f64.to_radians().sin(),
            },
            sensor: SensorSpec {
                side_px: 28,
                readout_sigma: 0.01,
                sample_sigma: 0.0,
            },
            params: PhaseObjectParams::default(),
            source: DigitSource::Synthetic,
            elastic: ElasticSpec::default(),
            calibration_count: 100,
        }
    }
}

/// Supplies the height map and label of object `id`.
enum Digits {
    Synthetic(GlyphGenerator),
    Corpus(Vec<(Image, u32)>),
}

impl Digits {
    fn load(config: &GenerationConfig) -> Result<Self> {
        match &config.source {
            DigitSource::Synthetic => Ok(Digits::Synthetic(GlyphGenerator::new(config.classes, DIGIT_SIDE)?)),
            DigitSource::Idx { images, labels } => {
                let mut pairs = idx::load_pair(images, labels)?;
                if pairs.len() < config.count {
                    return invalid(format!(
                        "digit corpus has {} images, {} requested",
                        pairs.len(),
                        config.count
                    ));
                }
                if let Some((_, bad)) = pairs.iter().find(|(_, l)| *l as usize >= config.classes) {
                    return invalid(format!("label {bad} exceeds class count {}", config.classes));
                }
                pairs.shuffle(&mut keyed_rng(config.seed, &[DOMAIN_SUBSET]));
                pairs.truncate(config.count);
                let pairs = pairs
                    .into_iter()
                    .map(|(img, label)| {
                        let fits = img.height <= config.grid.side_px && img.width <= config.grid.side_px;
                        let img = if fits { img } else { resize_cubic(&img, DIGIT_SIDE, DIGIT_SIDE)? };
                        let clamped = Image {
                            data: img.data.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                            ..img
                        };
                        Ok((clamped, label))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Digits::Corpus(pairs))
            }
        }
    }

    fn get(&self, seed: u64, id: u64) -> (Image, u32) {
        match self {
            Digits::Synthetic(gen) => gen.sample(&mut keyed_rng(seed, &[DOMAIN_GLYPH, id])),
            Digits::Corpus(pairs) => pairs[id as usize].clone(),
        }
    }
}

/// Everything needed to turn object ids into stacks.
pub struct Renderer {
    pub config: GenerationConfig,
    pub imager: Imager,
    digits: Digits,
}

impl Renderer {
    pub fn new(config: &GenerationConfig) -> Result<Self> {
        config.params.validate()?;
        if config.count == 0 {
            return invalid("dataset needs at least one object");
        }
        let array = config.layout.build(config.na)?;
        let pupil = make_pupil(config.grid, config.na)?;
        let imager = Imager::new(pupil, config.sensor, array)?;
        Ok(Renderer {
            config: config.clone(),
            imager,
            digits: Digits::load(config)?,
        })
    }

    pub fn object(&self, id: u64) -> Result<ThinObject> {
        let (g, label) = self.digits.get(self.config.seed, id);
        digit_to_phase_object(&g, &self.config.params, self.config.grid, label)
    }

    pub fn height_map(&self, id: u64) -> (Image, u32) {
        self.digits.get(self.config.seed, id)
    }

    /// Mean intensity of the all-LEDs-on image over the first calibration objects.
    pub fn reference_intensity(&self) -> Result<f64> {
        let n = self.config.calibration_count.clamp(1, self.config.count);
        let mut total = 0.0;
        for id in 0..n as u64 {
            let stack = render_stack(&self.object(id)?, &self.imager, id, None)?;
            let sum: f64 = stack.images.iter().map(|&v| v as f64).sum();
            total += sum / stack.plane_len() as f64;
        }
        let reference = total / n as f64;
        if !(reference > 0.0 && reference.is_finite()) {
            return invalid(format!("calibration produced reference intensity {reference}"));
        }
        Ok(reference)
    }

    pub fn render(&self, id: u64, reference: f64) -> Result<SubImageStack> {
        let noise = (!self.config.sensor.is_noiseless()).then_some(StackNoise {
            reference,
            seed: self.config.seed,
        });
        let mut stack = render_stack(&self.object(id)?, &self.imager, id, noise)?;
        stack.seed = self.config.seed;
        Ok(stack)
    }

    pub fn header(&self, reference: f64) -> DatasetHeader {
        let c = &self.config;
        DatasetHeader {
            led_count: self.imager.led_count(),
            height: c.sensor.side_px,
            width: c.sensor.side_px,
            class_count: c.classes,
            noise_reference: reference,
            global_seed: c.seed,
            grid: c.grid,
            sensor: c.sensor,
            params: c.params,
            elastic: c.elastic,
            array: self.imager.array.clone(),
        }
    }
}

/// Renders `config.count` objects. Each object draws from its own keyed
/// streams, so the result is the same for any worker count.
pub fn generate_dataset(config: &GenerationConfig) -> Result<Dataset> {
    let renderer = Renderer::new(config)?;
    let reference = renderer.reference_intensity()?;
    let examples = (0..config.count as u64)
        .into_par_iter()
        .map(|id| renderer.render(id, reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        header: renderer.header(reference),
        examples,
    })
}
