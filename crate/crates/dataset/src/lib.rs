//! Thin phase objects built from digit bitmaps, their per-LED sub-image stacks,
//! augmentation, and the on-disk dataset container.

pub mod augment;
pub mod container;
mod error;
pub mod generate;
pub mod glyphs;
pub mod idx;
mod image;
pub mod object;
pub mod resize;
pub mod rng;
pub mod split;
pub mod stack;

pub use augment::{augment, AugmentSpec, ElasticSpec};
pub use container::{load_dataset, save_dataset, Dataset, DatasetHeader, FORMAT_VERSION, MAGIC};
pub use error::{DataError, Result};
pub use generate::{generate_dataset, DigitSource, GenerationConfig, LedLayout, Renderer};
pub use image::Image;
pub use object::{digit_to_phase_object, AmplitudeConvention, PhaseObjectParams, ThinObject};
pub use resize::{resize_bilinear, resize_cubic};
pub use split::split_shuffle;
pub use stack::{render_stack, StackNoise, SubImageStack};
