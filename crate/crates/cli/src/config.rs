//! Run configuration: a TOML file with `[data]`, `[train]` and `[run]` sections.
//! Every field has a default, so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use dpcnn_core::{Strategy, TrainConfig};
use dpcnn_data::{AmplitudeConvention, DigitSource, ElasticSpec, GenerationConfig, LedLayout, PhaseObjectParams};
use dpcnn_optics::{GridSpec, SensorSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub train: TrainConfig,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LedConfig {
    /// 5×5 grid, neighbouring LEDs `pitch_deg` apart along each axis.
    Grid5x5 { pitch_deg: f64 },
    Rings { sines: Vec<f64>, counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Existing dataset container; when set, the generation fields are ignored.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// IDX digit files; synthetic glyphs when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idx_images: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idx_labels: Option<PathBuf>,
    pub count: usize,
    pub train_count: usize,
    pub classes: usize,
    pub seed: u64,
    pub grid_side: usize,
    /// Object pixel pitch, µm.
    pub pixel_pitch: f64,
    /// µm.
    pub wavelength: f64,
    pub na: f64,
    pub leds: LedConfig,
    pub sensor_side: usize,
    pub readout_sigma: f64,
    pub sample_sigma: f64,
    pub refractive_index: f64,
    /// µm.
    pub max_thickness: f64,
    pub absorption_alpha: f64,
    /// "literal" (A = αg) or "one_minus" (A = 1 − αg).
    pub amplitude: String,
    pub elastic_sigma: f64,
    pub elastic_amplitude: f64,
    pub calibration_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Strategy used by `train`.
    pub strategy: Strategy,
    /// Columns of the `sweep` table.
    pub strategies: Vec<Strategy>,
    /// Rows of the `sweep` table (sample-plane σ).
    pub noise_levels: Vec<f64>,
    /// Independent trials per cell; trial k trains with seed `train.seed + k`.
    pub trials: usize,
    /// Replace `train.input_gain` with L / reference intensity of the dataset.
    pub auto_gain: bool,
    /// Concurrent trials within a sweep.
    pub jobs: usize,
    pub out: PathBuf,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            path: None,
            idx_images: None,
            idx_labels: None,
            count: 6000,
            train_count: 5000,
            classes: 10,
            seed: 0,
            grid_side: 32,
            pixel_pitch: 1.25,
            wavelength: 0.5,
            na: 0.175,
            leds: LedConfig::Grid5x5 { pitch_deg: 7.2 },
            sensor_side: 28,
            readout_sigma: 0.01,
            sample_sigma: 0.0,
            refractive_index: 1.2,
            max_thickness: 2.5,
            absorption_alpha: 0.01,
            amplitude: "one_minus".into(),
            elastic_sigma: ElasticSpec::default().sigma,
            elastic_amplitude: ElasticSpec::default().amplitude,
            calibration_count: 100,
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            strategy: Strategy::Optimized,
            strategies: Strategy::ALL.to_vec(),
            noise_levels: vec![0.0, 0.025, 0.1],
            trials: 5,
            auto_gain: true,
            jobs: 1,
            out: PathBuf::from("runs"),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: DataConfig::default(),
            train: TrainConfig::default(),
            run: RunSection::default(),
        }
    }
}

/// A parsed configuration together with the exact text it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
}

impl LoadedConfig {
    /// Reads `path`, or the canonical serialization of the defaults when `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => {
                let config = RunConfig::default();
                let source = config.to_toml()?;
                Ok(LoadedConfig { config, source })
            }
            Some(p) => {
                let source = std::fs::read_to_string(p).map_err(|e| CliError::Config {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                let config = RunConfig::parse(&source).map_err(|message| CliError::Config {
                    path: p.display().to_string(),
                    message,
                })?;
                Ok(LoadedConfig { config, source })
            }
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let config: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Failed(format!("config serialization: {e}")))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let d = &self.data;
        if d.path.is_none() && !(d.train_count > 0 && d.train_count < d.count) {
            return Err(format!("train_count {} must lie in (0, count = {})", d.train_count, d.count));
        }
        if d.idx_images.is_some() != d.idx_labels.is_some() {
            return Err("idx_images and idx_labels must be given together".into());
        }
        if AmplitudeConvention::parse(&d.amplitude).is_none() {
            return Err(format!("amplitude must be \"literal\" or \"one_minus\", got {:?}", d.amplitude));
        }
        if !(d.readout_sigma >= 0.0 && d.sample_sigma >= 0.0) {
            return Err("noise scales must be non-negative".into());
        }
        let r = &self.run;
        if r.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if r.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        if r.strategies.is_empty() || r.noise_levels.is_empty() {
            return Err("sweep needs at least one strategy and one noise level".into());
        }
        if let Some(s) = r.noise_levels.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(format!("noise level {s} must be finite and non-negative"));
        }
        self.train.validate().map_err(|e| e.to_string())
    }

    /// Paper-scale sizes: 50,000 / 10,000 objects and 50,000 iterations.
    pub fn full_scale(&mut self) {
        self.data.count = 60_000;
        self.data.train_count = 50_000;
        self.train.iterations = 50_000;
    }

    /// First 16 hex digits of SHA-256 over `verb` and the canonical TOML form,
    /// ignoring the output root and the job count.
    pub fn hash(&self, verb: &str) -> Result<String> {
        let mut identity = self.clone();
        identity.run.out = PathBuf::new();
        identity.run.jobs = 1;
        let mut h = Sha256::new();
        h.update(verb.as_bytes());
        h.update([0]);
        h.update(identity.to_toml()?.as_bytes());
        Ok(h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect())
    }

    pub fn generation(&self) -> Result<GenerationConfig> {
        let d = &self.data;
        let convention = AmplitudeConvention::parse(&d.amplitude)
            .ok_or_else(|| CliError::Usage(format!("unknown amplitude convention {:?}", d.amplitude)))?;
        let layout = match &d.leds {
            LedConfig::Grid5x5 { pitch_deg } => LedLayout::Grid5x5 {
                pitch_sine: pitch_deg.to_radians().sin(),
            },
            LedConfig::Rings { sines, counts } => LedLayout::Rings {
                sines: sines.clone(),
                counts: counts.clone(),
            },
        };
        let source = match (&d.idx_images, &d.idx_labels) {
            (Some(images), Some(labels)) => DigitSource::Idx {
                images: images.clone(),
                labels: labels.clone(),
            },
            _ => DigitSource::Synthetic,
        };
        Ok(GenerationConfig {
            count: d.count,
            classes: d.classes,
            seed: d.seed,
            grid: GridSpec {
                side_px: d.grid_side,
                pitch: d.pixel_pitch,
                wavelength: d.wavelength,
            },
            na: d.na,
            layout,
            sensor: SensorSpec {
                side_px: d.sensor_side,
                readout_sigma: d.readout_sigma,
                sample_sigma: d.sample_sigma,
            },
            params: PhaseObjectParams {
                refractive_index: d.refractive_index,
                max_thickness: d.max_thickness,
                wavelength: d.wavelength,
                absorption_alpha: d.absorption_alpha,
                amplitude_convention: convention,
            },
            source,
            elastic: ElasticSpec {
                sigma: d.elastic_sigma,
                amplitude: d.elastic_amplitude,
            },
            calibration_count: d.calibration_count,
        })
    }
}

/// Creates `<out>/<verb>-<hash>/` and writes `config.toml` (the source text,
/// byte for byte) and `resolved.toml` (after command-line overrides).
pub fn prepare_run_dir(loaded: &LoadedConfig, resolved: &RunConfig, verb: &str) -> Result<PathBuf> {
    let dir = resolved.run.out.join(format!("{verb}-{}", resolved.hash(verb)?));
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_if_changed(&dir.join(CONFIG_ECHO), loaded.source.as_bytes())?;
    write_if_changed(&dir.join(RESOLVED_CONFIG), resolved.to_toml()?.as_bytes())?;
    Ok(dir)
}

pub const CONFIG_ECHO: &str = "config.toml";
pub const RESOLVED_CONFIG: &str = "resolved.toml";

/// Reads the resolved configuration stored in a run directory.
pub fn load_resolved(run_dir: &Path) -> Result<RunConfig> {
    let path = run_dir.join(RESOLVED_CONFIG);
    if !path.is_file() {
        return Err(CliError::Missing(format!("{} (not a run directory?)", path.display())));
    }
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    RunConfig::parse(&text).map_err(|message| CliError::Config {
        path: path.display().to_string(),
        message,
    })
}

/// Existing files with identical contents are left untouched.
pub(crate) fn write_if_changed(path: &Path, bytes: &[u8]) -> Result<()> {
    if std::fs::read(path).is_ok_and(|old| old == bytes) {
        return Ok(());
    }
    std::fs::write(path, bytes).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::parse("[train]\nlearning_rate = 1.0\n").is_err());
        assert!(RunConfig::parse("[run]\ntrials = 0\n").is_err());
        assert!(RunConfig::parse("[data]\namplitude = \"opaque\"\n").is_err());
        assert!(RunConfig::parse("[data]\ntrain_count = 6000\n").is_err());
    }

    #[test]
    fn sections_override_fields() {
        let c = RunConfig::parse(
            "[data]\ncount = 20\ntrain_count = 15\nleds = { kind = \"rings\", sines = [0.0, 0.1], counts = [1, 4] }\n\
             [run]\nstrategy = \"dpc\"\nnoise_levels = [0.1]\n[train]\niterations = 7\n",
        )
        .unwrap();
        assert_eq!((c.data.count, c.train.iterations, c.run.strategy), (20, 7, Strategy::Dpc));
        assert_eq!(c.generation().unwrap().layout.build(0.175).unwrap().len(), 5);
    }

    #[test]
    fn hash_depends_on_verb_and_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.train.seed = 1;
        assert_eq!(a.hash("train").unwrap(), a.hash("train").unwrap());
        assert_ne!(a.hash("train").unwrap(), a.hash("sweep").unwrap());
        assert_ne!(a.hash("train").unwrap(), b.hash("train").unwrap());
        assert_eq!(a.hash("train").unwrap().len(), 16);
    }
}
