use crate::error::{invalid, Result};

/// Square sampling grid at the object plane. Lengths are in micrometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub side_px: usize,
    pub pitch: f64,
    pub wavelength: f64,
}

impl GridSpec {
    pub fn new(side_px: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        let grid = GridSpec {
            side_px,
            pitch,
            wavelength,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.side_px < 2 {
            return invalid(format!("grid side must be >= 2, got {}", self.side_px));
        }
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return invalid(format!("grid pitch must be positive, got {}", self.pitch));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return invalid(format!("wavelength must be positive, got {}", self.wavelength));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.side_px * self.side_px
    }

    pub fn is_empty(&self) -> bool {
        self.side_px == 0
    }

    /// Full extent of the frequency grid, 1/pitch cycles/µm.
    pub fn frequency_extent(&self) -> f64 {
        1.0 / self.pitch
    }

    /// Spacing between adjacent DFT bins, 1/(side·pitch) cycles/µm.
    pub fn frequency_step(&self) -> f64 {
        1.0 / (self.side_px as f64 * self.pitch)
    }

    /// Signed bin number of DFT index `k` in standard (unshifted) order.
    pub fn signed_bin(&self, k: usize) -> i64 {
        let n = self.side_px as i64;
        let k = k as i64;
        if k < (n + 1) / 2 {
            k
        } else {
            k - n
        }
    }

    /// Spatial frequency (cycles/µm) of DFT index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        self.signed_bin(k) as f64 * self.frequency_step()
    }

    /// Position (µm) of sample `i` measured from the grid center at index side/2.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.side_px / 2) as f64) * self.pitch
    }
}
