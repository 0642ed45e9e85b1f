use dpcnn_data::SubImageStack;
use dpcnn_nn::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoreError, Result};
use crate::train::JointModel;

const EVAL_BATCH: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub predictions: Vec<u32>,
    pub labels: Vec<u32>,
}

impl Evaluation {
    pub fn from_predictions(predictions: Vec<u32>, labels: Vec<u32>, classes: usize) -> Result<Self> {
        if predictions.is_empty() {
            return Err(CoreError::Empty("test set"));
        }
        if predictions.len() != labels.len() {
            return invalid(format!("{} predictions for {} labels", predictions.len(), labels.len()));
        }
        let mut confusion = vec![vec![0u64; classes]; classes];
        for (&p, &y) in predictions.iter().zip(&labels) {
            if p as usize >= classes || y as usize >= classes {
                return invalid(format!("class index out of range for {classes} classes"));
            }
            confusion[y as usize][p as usize] += 1;
        }
        let correct: u64 = (0..classes).map(|c| confusion[c][c]).sum();
        Ok(Evaluation {
            accuracy: correct as f64 / predictions.len() as f64,
            confusion,
            predictions,
            labels,
        })
    }
}

fn argmax<T: Scalar>(row: &[T]) -> u32 {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best as u32
}

/// Evaluation-mode predictions (argmax of logits, lowest index on ties).
pub fn evaluate<T: Scalar>(model: &JointModel<T>, test: &[SubImageStack], classes: usize) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(CoreError::Empty("test set"));
    }
    let mut predictions = Vec::with_capacity(test.len());
    for chunk in test.chunks(EVAL_BATCH) {
        let refs: Vec<&SubImageStack> = chunk.iter().collect();
        let logits = model.logits(&refs)?;
        let c = logits.shape()[1];
        predictions.extend(logits.data.chunks_exact(c).map(argmax));
    }
    Evaluation::from_predictions(predictions, test.iter().map(|s| s.label).collect(), classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant_predictors() {
        let e = Evaluation::from_predictions(vec![0, 1, 2, 3], vec![0, 1, 2, 3], 4).unwrap();
        assert_eq!(e.accuracy, 1.0);
        for (i, row) in e.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>(), row[i]);
        }
        let c = Evaluation::from_predictions(vec![1; 6], vec![0, 1, 0, 1, 0, 1], 2).unwrap();
        assert_eq!(c.accuracy, 0.5);
        assert!(Evaluation::from_predictions(vec![], vec![], 2).is_err());
        assert!(Evaluation::from_predictions(vec![2], vec![0], 2).is_err());
    }
}
