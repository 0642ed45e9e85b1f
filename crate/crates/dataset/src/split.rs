use rand::seq::SliceRandom;

use crate::error::{invalid, DataError, Result};
use crate::rng::{keyed_rng, DOMAIN_SPLIT};

/// Seeded Fisher-Yates shuffle followed by a train/test cut at
/// `round(n · train_fraction)`.
pub fn split_shuffle<T>(examples: Vec<T>, train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return invalid(format!("train fraction {train_fraction} must lie in (0, 1)"));
    }
    let n = examples.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 {
        return Err(DataError::EmptySplit("train"));
    }
    if n_train >= n {
        return Err(DataError::EmptySplit("test"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut keyed_rng(seed, &[DOMAIN_SPLIT]));
    let mut slots: Vec<Option<T>> = examples.into_iter().map(Some).collect();
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    for (rank, &i) in order.iter().enumerate() {
        let item = slots[i].take().expect("permutation visits each index once");
        if rank < n_train {
            train.push(item);
        } else {
            test.push(item);
        }
    }
    Ok((train, test))
}
