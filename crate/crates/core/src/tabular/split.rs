use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::DataError;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratio: f64,
}

/// Number of rows a class contributes to the test side. Class remainders go
/// to train. The epsilon absorbs `(1 - 0.8) * 50 = 9.999...` style rounding.
pub(crate) fn test_count(class_rows: usize, ratio: f64) -> usize {
    ((1.0 - ratio) * class_rows as f64 + 1e-9).floor() as usize
}

/// Per-class seeded shuffle followed by a prefix split. Both partitions keep
/// source row order.
pub fn stratified_split(d: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair, DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::InvalidRatio(ratio));
    }
    let n_classes = d.class_labels().len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for r in 0..d.n_rows() {
        by_class[d.class_of(r)].push(r);
    }
    for (class, rows) in by_class.iter().enumerate() {
        if rows.len() < 2 {
            return Err(DataError::ClassTooSmall {
                class: d.class_labels()[class].clone(),
                count: rows.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(d.n_rows());
    let mut test = Vec::new();
    for mut rows in by_class {
        rows.shuffle(&mut rng);
        let n_train = rows.len() - test_count(rows.len(), ratio);
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();

    Ok(SplitPair {
        train: d.select_rows(&train),
        test: d.select_rows(&test),
        seed,
        ratio,
    })
}
