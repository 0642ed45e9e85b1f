use std::fmt;
use std::str::FromStr;

use dpcnn_optics::LedArray;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoreError, Result};

/// Signed per-LED brightness; a negative weight stands for a second capture
/// that is subtracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlluminationWeights {
    pub w: Vec<f64>,
}

impl IlluminationWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(CoreError::Empty("weight vector"));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return invalid("weights must be finite");
        }
        Ok(IlluminationWeights { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn check_array(&self, array: &LedArray) -> Result<()> {
        if self.w.len() != array.len() {
            return Err(CoreError::Shape(format!("{} weights for {} LEDs", self.w.len(), array.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Center,
    All,
    OffAxis,
    RandomSigned,
    Dpc,
}

/// A Table-1 column: one fixed baseline or the jointly learned pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Center,
    All,
    OffAxis,
    Random,
    Dpc,
    Optimized,
}

impl Strategy {
    /// Column order of the report table.
    pub const ALL: [Strategy; 6] = [
        Strategy::Center,
        Strategy::All,
        Strategy::OffAxis,
        Strategy::Random,
        Strategy::Dpc,
        Strategy::Optimized,
    ];

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            Strategy::Center => Some(BaselineKind::Center),
            Strategy::All => Some(BaselineKind::All),
            Strategy::OffAxis => Some(BaselineKind::OffAxis),
            Strategy::Random => Some(BaselineKind::RandomSigned),
            Strategy::Dpc => Some(BaselineKind::Dpc),
            Strategy::Optimized => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Center => "center",
            Strategy::All => "all",
            Strategy::OffAxis => "off_axis",
            Strategy::Random => "random",
            Strategy::Dpc => "dpc",
            Strategy::Optimized => "optimized",
        }
    }

    /// Column heading in the text report.
    pub fn title(self) -> &'static str {
        match self {
            Strategy::Center => "Center",
            Strategy::All => "All",
            Strategy::OffAxis => "Off-axis",
            Strategy::Random => "Random",
            Strategy::Dpc => "DPC",
            Strategy::Optimized => "Optimized",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "random_signed" && *k == Strategy::Random))
            .ok_or_else(|| CoreError::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

const AXIS_TOL: f64 = 1e-12;

/// Fixed illumination patterns. `rng` is only drawn from by `RandomSigned`.
pub fn baseline_pattern<R: Rng + ?Sized>(kind: BaselineKind, array: &LedArray, rng: &mut R) -> Result<IlluminationWeights> {
    let l = array.len();
    if l == 0 {
        return Err(CoreError::Empty("LED array"));
    }
    let mut w = vec![0.0; l];
    match kind {
        BaselineKind::Center => {
            let c = array
                .center_index()
                .filter(|&i| array.leds[i].sine_norm() <= AXIS_TOL)
                .ok_or_else(|| CoreError::InvalidArgument("array has no on-axis LED".into()))?;
            w[c] = 1.0;
        }
        BaselineKind::All => w.iter_mut().for_each(|v| *v = 1.0 / l as f64),
        BaselineKind::OffAxis => {
            let (i, led) = array
                .leds
                .iter()
                .enumerate()
                .filter(|(_, led)| led.sy.abs() <= AXIS_TOL && led.sx > AXIS_TOL)
                .min_by(|a, b| a.1.sx.total_cmp(&b.1.sx))
                .ok_or_else(|| CoreError::InvalidArgument("no LED on the +x axis".into()))?;
            if !led.bright_field {
                return invalid(format!("nearest +x LED ({}, {}) is dark-field", led.sx, led.sy));
            }
            w[i] = 1.0;
        }
        BaselineKind::RandomSigned => w.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0)),
        BaselineKind::Dpc => {
            let pos = array.leds.iter().filter(|led| led.sx > AXIS_TOL).count();
            let neg = array.leds.iter().filter(|led| led.sx < -AXIS_TOL).count();
            if pos == 0 || neg == 0 {
                return invalid("DPC needs LEDs on both sides of the x = 0 axis");
            }
            for (v, led) in w.iter_mut().zip(&array.leds) {
                if led.sx > AXIS_TOL {
                    *v = 1.0 / pos as f64;
                } else if led.sx < -AXIS_TOL {
                    *v = -1.0 / neg as f64;
                }
            }
        }
    }
    IlluminationWeights::new(w)
}
