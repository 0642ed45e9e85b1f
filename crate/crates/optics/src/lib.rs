//! Coherent image formation for a thin sample under LED-array illumination.
//!
//! Each LED is a tilted plane wave. The sample field is low-pass filtered by a
//! circular pupil (spectrally, so the convolution is circular), squared, pooled
//! onto the detector grid and optionally perturbed by Gaussian noise.

mod error;
mod fft;
mod field;
mod grid;
mod imaging;
mod led;
mod pupil;
mod sensor;

pub use error::{OpticsError, Result};
pub use fft::Fft2;
pub use field::ComplexField;
pub use grid::GridSpec;
pub use imaging::{coherent_intensity, form_subimage, shifted_pupil, tilt_field, Imager, Noise};
pub use led::{make_led_grid_5x5, make_led_rings, Led, LedArray};
pub use pupil::{make_pupil, PupilMask};
pub use sensor::{add_channel_noise, add_noise, pixel_sample, DetectorImage, SensorSpec};
