use dpcnn_optics::{ComplexField, GridSpec};
use num_complex::Complex64;

use crate::error::{invalid, DataError, Result};
use crate::image::Image;

/// How absorption is derived from the height map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeConvention {
    /// `A = α·g`: the sample transmits only where material is present.
    Literal,
    /// `A = 1 − α·g`: a clear sheet attenuated in proportion to its height.
    OneMinus,
}

impl AmplitudeConvention {
    pub fn code(self) -> u8 {
        match self {
            AmplitudeConvention::Literal => 0,
            AmplitudeConvention::OneMinus => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(AmplitudeConvention::Literal),
            1 => Some(AmplitudeConvention::OneMinus),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AmplitudeConvention::Literal => "literal",
            AmplitudeConvention::OneMinus => "one_minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "literal" => Some(AmplitudeConvention::Literal),
            "one_minus" => Some(AmplitudeConvention::OneMinus),
            _ => None,
        }
    }
}

/// Material constants of the transparent sheet. Lengths in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseObjectParams {
    pub refractive_index: f64,
    pub max_thickness: f64,
    pub wavelength: f64,
    pub absorption_alpha: f64,
    pub amplitude_convention: AmplitudeConvention,
}

impl Default for PhaseObjectParams {
    fn default() -> Self {
        PhaseObjectParams {
            refractive_index: 1.2,
            max_thickness: 2.5,
            wavelength: 0.5,
            absorption_alpha: 0.01,
            amplitude_convention: AmplitudeConvention::Literal,
        }
    }
}

impl PhaseObjectParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return invalid(format!("refractive index {} must be >= 1", self.refractive_index));
        }
        if !(self.max_thickness > 0.0 && self.max_thickness.is_finite()) {
            return invalid(format!("thickness {} must be > 0", self.max_thickness));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return invalid(format!("wavelength {} must be > 0", self.wavelength));
        }
        if !(0.0..=1.0).contains(&self.absorption_alpha) {
            return invalid(format!("absorption {} must lie in [0, 1]", self.absorption_alpha));
        }
        Ok(())
    }

    /// Phase delay (radians) at normalized height `g`.
    pub fn phase(&self, g: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.refractive_index * self.max_thickness * g / self.wavelength
    }

    pub fn amplitude(&self, g: f64) -> f64 {
        match self.amplitude_convention {
            AmplitudeConvention::Literal => self.absorption_alpha * g,
            AmplitudeConvention::OneMinus => 1.0 - self.absorption_alpha * g,
        }
    }
}

/// Thin-sample transmittance `amplitude · exp(i·phase)` on the object grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinObject {
    pub grid: GridSpec,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub label: u32,
}

impl ThinObject {
    pub fn transmittance(&self) -> ComplexField {
        let values = self
            .amplitude
            .iter()
            .zip(&self.phase)
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect();
        ComplexField {
            grid: self.grid,
            values,
        }
    }
}

/// Treats a normalized grayscale bitmap as the height map of a clear sheet,
/// zero-padding it (centered) to the object grid.
pub fn digit_to_phase_object(
    g: &Image,
    params: &PhaseObjectParams,
    grid: GridSpec,
    label: u32,
) -> Result<ThinObject> {
    params.validate()?;
    grid.validate()?;
    let n = grid.side_px;
    if g.height > n || g.width > n {
        return Err(DataError::Dimension(format!(
            "{}×{} bitmap does not fit a {n}×{n} grid",
            g.height, g.width
        )));
    }
    if let Some(bad) = g.data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return invalid(format!("height map value {bad} outside [0, 1]"));
    }
    let (oy, ox) = ((n - g.height) / 2, (n - g.width) / 2);
    let mut height = vec![0.0; n * n];
    for y in 0..g.height {
        for x in 0..g.width {
            height[(y + oy) * n + x + ox] = g.at(y, x);
        }
    }
    Ok(ThinObject {
        grid,
        amplitude: height.iter().map(|&h| params.amplitude(h)).collect(),
        phase: height.iter().map(|&h| params.phase(h)).collect(),
        label,
    })
}
