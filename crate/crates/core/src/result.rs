use std::path::{Path, PathBuf};

use dpcnn_nn::{load_checkpoint, save_checkpoint, CheckpointEntry, CnnParams, CnnShape};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CoreError, Result};
use crate::evaluate::Evaluation;
use crate::patterns::Strategy;
use crate::train::{TrainConfig, Trained};

pub const METRICS_FILE: &str = "metrics.json";
pub const CHECKPOINT_FILE: &str = "model.ck";

/// Everything about a trial except the classifier parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub strategy: Strategy,
    pub seed: u64,
    pub accuracy: f64,
    pub confusion: Vec<Vec<u64>>,
    pub predictions: Vec<u32>,
    pub labels: Vec<u32>,
    pub w: Vec<f64>,
    pub input_gain: f64,
    pub input_side: usize,
    pub classes: usize,
    pub config: TrainConfig,
    pub loss_trace: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub metrics: TrialMetrics,
    pub params: CnnParams<f32>,
}

impl TrialResult {
    pub fn new(strategy: Strategy, config: TrainConfig, trained: Trained, eval: Evaluation) -> Self {
        TrialResult {
            metrics: TrialMetrics {
                strategy,
                seed: config.seed,
                accuracy: eval.accuracy,
                confusion: eval.confusion,
                predictions: eval.predictions,
                labels: eval.labels,
                w: trained.w,
                input_gain: trained.gain,
                input_side: trained.shape.side,
                classes: trained.shape.classes,
                config,
                loss_trace: trained.loss_trace,
            },
            params: trained.params,
        }
    }

    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }

    pub fn shape(&self) -> CnnShape {
        CnnShape {
            side: self.metrics.input_side,
            ..CnnShape::mnist(self.metrics.classes)
        }
    }

    pub fn metrics_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.metrics).map_err(|e| CoreError::InvalidArgument(e.to_string()))
    }

    /// Writes `metrics.json` and `model.ck` (classifier groups plus the LED
    /// weights as group "illumination") into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let metrics = dir.join(METRICS_FILE);
        std::fs::write(&metrics, self.metrics_json()? + "\n").map_err(io_err(&metrics))?;
        let mut entries = self.params.to_entries();
        entries.push(CheckpointEntry {
            name: "illumination".into(),
            shape: vec![self.metrics.w.len()],
            values: self.metrics.w.iter().map(|&v| v as f32).collect(),
        });
        let ck = dir.join(CHECKPOINT_FILE);
        save_checkpoint(&ck, &entries)?;
        Ok((metrics, ck))
    }
}

pub fn load_trial(dir: &Path) -> Result<TrialResult> {
    let path = dir.join(METRICS_FILE);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let metrics: TrialMetrics = serde_json::from_str(&text).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let params = CnnParams::from_entries(&load_checkpoint(&dir.join(CHECKPOINT_FILE))?)?;
    let result = TrialResult { metrics, params };
    result.params.check_shapes(&result.shape())?;
    Ok(result)
}
