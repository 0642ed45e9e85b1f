use num_complex::Complex64;

use crate::error::{OpticsError, Result};
use crate::grid::GridSpec;

/// Complex amplitude sampled on a square grid, row-major with `y` as the slow axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(OpticsError::Dimension(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(OpticsError::InvalidArgument(
                "field contains non-finite values".into(),
            ));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn constant(grid: GridSpec, value: Complex64) -> Self {
        ComplexField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn side(&self) -> usize {
        self.grid.side_px
    }

    pub fn at(&self, x: usize, y: usize) -> Complex64 {
        self.values[y * self.grid.side_px + x]
    }

    /// Element-wise product; grids must agree.
    pub fn multiply(&self, other: &ComplexField) -> Result<ComplexField> {
        if self.grid != other.grid {
            return Err(OpticsError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ComplexField {
            grid: self.grid,
            values,
        })
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}
