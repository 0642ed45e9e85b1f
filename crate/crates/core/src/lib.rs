//! Programmable-illumination classifier: the physical layer that mixes the L
//! sub-images with LED weights, fixed illumination baselines, joint and
//! frozen-weight training, evaluation, voting and learned-pattern analysis.

mod analysis;
mod error;
mod evaluate;
mod patterns;
mod physical;
mod result;
mod train;
mod vote;

pub use analysis::{
    canonicalize_sign, export_pattern, parse_pattern_csv, pattern_pixel, pattern_stats, PatternFiles, PatternStats,
    PATTERN_IMAGE_SIDE,
};
pub use error::{CoreError, Result};
pub use evaluate::{evaluate, Evaluation};
pub use patterns::{baseline_pattern, BaselineKind, IlluminationWeights, Strategy};
pub use physical::{physical_layer, physical_layer_backward, physical_layer_stack_grad};
pub use result::{load_trial, TrialMetrics, TrialResult, CHECKPOINT_FILE, METRICS_FILE};
pub use train::{
    default_input_gain, joint_loss_and_grad, run_trial, train_dpcnn, train_fixed, JointModel, OptimizerKind,
    TrainConfig, Trained,
};
pub use vote::majority_vote;
