//! Minimal NHWC convolutional network engine.
//!
//! Five layer kinds (same-padded 5×5 convolution, ReLU, 2×2 max-pool, dense,
//! inverted dropout) with hand-written backward passes, softmax cross-entropy,
//! Adam / SGD, a finite-difference gradient checker and a binary checkpoint
//! format. Every routine is generic over [`Scalar`] so the f64 checks and the
//! f32 training runs share one code path.

pub mod adam;
pub mod checkpoint;
mod error;
pub mod gradcheck;
pub mod layers;
pub mod model;
mod scalar;
mod tensor;

pub use adam::{adam_step, sgd_step, AdamConfig, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CheckpointEntry, CHECKPOINT_MAGIC};
pub use error::{NnError, Result};
pub use gradcheck::{grad_check, relative_error, GradCheckReport, GradCheckSpec, GroupReport, Probe};
pub use model::{Cnn, CnnGrads, CnnParams, CnnShape, ForwardCache, GROUP_NAMES};
pub use scalar::Scalar;
pub use tensor::Tensor;
