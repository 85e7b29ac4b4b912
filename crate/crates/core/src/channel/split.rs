use serde::{Deserialize, Serialize};

use super::dataset::CsiDataset;
use crate::error::{Error, Result};
use crate::tensor::Rng;

/// Train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.val_fraction, self.test_fraction];
        if f.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid(format!("split fractions must lie in [0, 1]: {f:?}")));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("split fractions must sum to 1: {f:?}")));
        }
        Ok(())
    }

    /// (train, val, test) sizes for `n` samples; rounding remainder goes to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let val = (self.val_fraction * n as f64).round() as usize;
        let test = (self.test_fraction * n as f64).round() as usize;
        (n - val - test, val, test)
    }
}

pub struct Partition {
    pub train: CsiDataset,
    pub val: CsiDataset,
    pub test: CsiDataset,
}

/// Shuffled, disjoint, exhaustive partition. Within each part samples keep
/// their original (time) order.
pub fn split(ds: &CsiDataset, spec: &SplitSpec, seed: u64) -> Result<Partition> {
    spec.validate()?;
    if ds.len() < 10 {
        return Err(Error::invalid(format!(
            "split needs at least 10 samples, got {}",
            ds.len()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    Rng::new(seed, 0).shuffle(&mut idx);
    let (n_train, n_val, _) = spec.sizes(ds.len());
    let mut parts = [
        idx[..n_train].to_vec(),
        idx[n_train..n_train + n_val].to_vec(),
        idx[n_train + n_val..].to_vec(),
    ];
    for p in &mut parts {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(Partition {
        train: ds.select(&train),
        val: ds.select(&val),
        test: ds.select(&test),
    })
}
