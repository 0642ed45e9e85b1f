use crate::error::{invalid, Result};
use crate::grid::GridSpec;

/// Samples closer than this fraction of a frequency bin to the cutoff circle
/// count as inside, so on-circle lattice points do not depend on rounding.
pub(crate) const EDGE_TOLERANCE_BINS: f64 = 1e-9;

/// Binary coherent transfer function: 1 inside radius `na / λ`, 0 outside.
///
/// The mask is stored in standard DFT order (DC at index 0) so it multiplies a
/// forward transform directly. The coherent PSF is its inverse DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct PupilMask {
    pub grid: GridSpec,
    pub na: f64,
    pub mask: Vec<bool>,
}

pub fn make_pupil(grid: GridSpec, na: f64) -> Result<PupilMask> {
    grid.validate()?;
    if !(na > 0.0 && na < 1.0) {
        return invalid(format!("numerical aperture must lie in (0, 1), got {na}"));
    }
    let n = grid.side_px;
    let cutoff = na / grid.wavelength + EDGE_TOLERANCE_BINS * grid.frequency_step();
    let cutoff_sq = cutoff * cutoff;
    let mut mask = Vec::with_capacity(n * n);
    for ky in 0..n {
        let fy = grid.frequency(ky);
        for kx in 0..n {
            let fx = grid.frequency(kx);
            mask.push(fx * fx + fy * fy <= cutoff_sq);
        }
    }
    Ok(PupilMask { grid, na, mask })
}

impl PupilMask {
    pub fn cutoff(&self) -> f64 {
        self.na / self.grid.wavelength
    }

    pub fn passed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn at(&self, kx: usize, ky: usize) -> bool {
        self.mask[ky * self.grid.side_px + kx]
    }

    /// True when the mask is invariant under f -> -f.
    pub fn is_symmetric(&self) -> bool {
        let n = self.grid.side_px;
        (0..n).all(|ky| {
            (0..n).all(|kx| self.at(kx, ky) == self.at((n - kx) % n, (n - ky) % n))
        })
    }

    /// Mask rearranged with DC at the center (index side/2), for display.
    pub fn centered(&self) -> Vec<bool> {
        let n = self.grid.side_px;
        let half = n / 2;
        let mut out = vec![false; n * n];
        for ky in 0..n {
            for kx in 0..n {
                out[((ky + half) % n) * n + (kx + half) % n] = self.at(kx, ky);
            }
        }
        out
    }
}
