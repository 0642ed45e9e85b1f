//! Command-line harness for programmable-illumination classification:
//! configuration, run directories, sweeps and their report tables, pattern
//! export and the invariant self-test.

pub mod checks;
pub mod config;
mod error;
pub mod export;
pub mod report;
pub mod run;
pub mod selftest;

pub use config::{load_resolved, prepare_run_dir, DataConfig, LedConfig, LoadedConfig, RunConfig, RunSection};
pub use error::{CliError, Result};
pub use export::{cmd_export, mean_and_variance, normalized_pattern, ExportSummary};
pub use report::{Cell, ReportTable};
pub use run::{cmd_gen_data, cmd_sweep, cmd_train, find_trials, trial_dir};
pub use selftest::cmd_selftest;
