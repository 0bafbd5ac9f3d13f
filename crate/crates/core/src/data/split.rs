//! Per-user train/valid/test split of the binarized rating matrix.
//!
//! For every user, 10% of the positives (floored) are held out for
//! validation and another 10% for test, sampled uniformly without
//! replacement from the run's seeded generator. Users with fewer than 3
//! positives keep everything in train.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::sbm::SparseBinaryMatrix;
use crate::error::Result;

pub const HOLDOUT_FRACTION: f64 = 0.1;
pub const MIN_SPLIT_DEGREE: usize = 3;

/// Entrywise-disjoint partition of the full matrix; the three parts share
/// its shape and their union reproduces it exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    pub train: SparseBinaryMatrix,
    pub valid: SparseBinaryMatrix,
    pub test: SparseBinaryMatrix,
    pub seed: u64,
}

pub fn split_per_user(y: &SparseBinaryMatrix, seed: u64) -> Result<SplitDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_rows = Vec::with_capacity(y.rows());
    let mut valid_rows = Vec::with_capacity(y.rows());
    let mut test_rows = Vec::with_capacity(y.rows());

    for u in 0..y.rows() {
        let positives = y.row(u);
        let deg = positives.len();
        if deg < MIN_SPLIT_DEGREE {
            train_rows.push(positives.to_vec());
            valid_rows.push(Vec::new());
            test_rows.push(Vec::new());
            continue;
        }
        let holdout = (HOLDOUT_FRACTION * deg as f64).floor() as usize;
        let mut shuffled = positives.to_vec();
        shuffled.shuffle(&mut rng);
        valid_rows.push(shuffled[..holdout].to_vec());
        test_rows.push(shuffled[holdout..2 * holdout].to_vec());
        train_rows.push(shuffled[2 * holdout..].to_vec());
    }

    Ok(SplitDataset {
        train: SparseBinaryMatrix::from_row_lists(y.cols(), train_rows)?,
        valid: SparseBinaryMatrix::from_row_lists(y.cols(), valid_rows)?,
        test: SparseBinaryMatrix::from_row_lists(y.cols(), test_rows)?,
        seed,
    })
}
