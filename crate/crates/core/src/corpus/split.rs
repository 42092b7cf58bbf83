use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl SplitRatio {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self, CorpusError> {
        let ratio = SplitRatio { train, valid, test };
        for (name, frac) in [("train", train), ("valid", valid), ("test", test)] {
            if !(0.0..=1.0).contains(&frac) {
                return Err(CorpusError::Config(format!(
                    "split_ratio {name} fraction {frac} is outside [0, 1]"
                )));
            }
        }
        if ((train + valid + test) - 1.0).abs() > 1e-9 {
            return Err(CorpusError::Config(format!(
                "split_ratio {ratio} does not sum to 1"
            )));
        }
        Ok(ratio)
    }

    /// Part sizes for `n` examples: floor for train and valid, remainder to test.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // The small slack keeps products such as 0.29 * 100 from flooring to 28.
        let part = |frac: f64| ((n as f64) * frac + 1e-9).floor() as usize;
        let train = part(self.train).min(n);
        let valid = part(self.valid).min(n - train);
        (train, valid, n - train - valid)
    }
}

impl Default for SplitRatio {
    fn default() -> Self {
        SplitRatio {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

impl fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.train, self.valid, self.test)
    }
}

/// Partitions `data` into train/valid/test. With `shuffle`, a permutation seeded
/// by `seed` is applied first.
pub fn split<T>(
    mut data: Vec<T>,
    ratio: SplitRatio,
    seed: u64,
    shuffle: bool,
) -> Result<(Vec<T>, Vec<T>, Vec<T>), CorpusError> {
    let n = data.len();
    let all_nonzero = ratio.train > 0.0 && ratio.valid > 0.0 && ratio.test > 0.0;
    if n < 3 && all_nonzero {
        return Err(CorpusError::Split { len: n, ratio });
    }
    if shuffle {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        data.shuffle(&mut rng);
    }
    let (train, valid, _) = ratio.sizes(n);
    let mut rest = data.split_off(train);
    let test = rest.split_off(valid);
    Ok((data, rest, test))
}
