use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FoldScheme {
    /// One fold with `floor(n * train_frac)` training rows.
    RandomSplit { train_frac: f64 },
    /// One fold per level; `levels[i]` is row `i`'s level index.
    LeaveOneLevelOut { levels: Vec<u32>, n_levels: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits `0..n` into (train, test) index sets. Each returned set is sorted.
pub fn make_folds(n: usize, scheme: &FoldScheme, seed: u64) -> Result<Vec<Fold>> {
    match scheme {
        FoldScheme::RandomSplit { train_frac } => {
            if !(*train_frac > 0.0 && *train_frac < 1.0) {
                return Err(Error::Config(format!(
                    "train_frac must lie in (0, 1), got {train_frac}"
                )));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            idx.shuffle(&mut rng);
            let n_train = (n as f64 * train_frac).floor() as usize;
            let (train, test) = idx.split_at(n_train);
            let mut fold = Fold {
                train: train.to_vec(),
                test: test.to_vec(),
            };
            if fold.train.is_empty() {
                return Err(Error::EmptyFold("random split: training set".into()));
            }
            if fold.test.is_empty() {
                return Err(Error::EmptyFold("random split: test set".into()));
            }
            fold.train.sort_unstable();
            fold.test.sort_unstable();
            Ok(vec![fold])
        }
        FoldScheme::LeaveOneLevelOut { levels, n_levels } => {
            if levels.len() != n {
                return Err(Error::Config(format!(
                    "{} level codes for {n} rows",
                    levels.len()
                )));
            }
            let mut folds = Vec::with_capacity(*n_levels);
            for level in 0..*n_levels as u32 {
                let (test, train): (Vec<usize>, Vec<usize>) =
                    (0..n).partition(|&i| levels[i] == level);
                if test.is_empty() {
                    return Err(Error::EmptyFold(format!(
                        "leave-one-level-out fold for level {level}: no rows"
                    )));
                }
                if train.is_empty() {
                    return Err(Error::EmptyFold(format!(
                        "leave-one-level-out fold for level {level}: no training rows"
                    )));
                }
                folds.push(Fold { train, test });
            }
            Ok(folds)
        }
    }
}
