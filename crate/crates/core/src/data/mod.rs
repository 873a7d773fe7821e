//! Dataset ingestion (IDX and CIFAR-10 binary), synthetic generation,
//! splits, and the seeded mini-batch sampler.

mod cifar;
mod idx;
mod synth;

pub use cifar::load_cifar10_binary;
pub use idx::{load_idx, write_idx_files};
pub use synth::synth_blobs;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An in-memory classification dataset: an n×d feature matrix and one label
/// in 0..q per row. Immutable after construction and shareable across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Consistency(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::Consistency(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self { name: name.into(), features, labels, class_count })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Per-class sample counts, length `class_count`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Config(format!("subset index {bad} out of range")));
        }
        let features = self.features.select(ndarray::Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(name, features, labels, self.class_count)
    }
}

/// Seeded mini-batch schedule. Each epoch draws a fresh permutation from
/// (seed, epoch), so runs are reproducible and epochs differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub seed: u64,
    pub drop_last: bool,
}

impl BatchPlan {
    /// Index batches for one epoch over `n` samples: a seeded permutation of
    /// 0..n chunked into `batch_size` pieces. With `drop_last` the trailing
    /// partial batch is discarded, otherwise it is kept.
    pub fn epoch_batches(&self, n: usize, epoch: u64) -> Result<Vec<Vec<usize>>> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.batch_size > n {
            return Err(Error::Config(format!(
                "batch size {} exceeds sample count {n}",
                self.batch_size
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(epoch);
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        let mut batches: Vec<Vec<usize>> = indices
            .chunks(self.batch_size)
            .map(|c| c.to_vec())
            .collect();
        if self.drop_last {
            if let Some(last) = batches.last() {
                if last.len() < self.batch_size {
                    batches.pop();
                }
            }
        }
        Ok(batches)
    }
}

/// Mini-batch index sequence for `dataset` at `epoch` under `plan`.
pub fn minibatches(dataset: &Dataset, plan: &BatchPlan, epoch: u64) -> Result<Vec<Vec<usize>>> {
    plan.epoch_batches(dataset.len(), epoch)
}

/// Seeded disjoint train/test split; the test side gets
/// round(n · test_fraction) rows.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0,1), got {test_fraction}"
        )));
    }
    let n = dataset.len();
    let test_n = ((n as f64) * test_fraction).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let (test_idx, train_idx) = indices.split_at(test_n);
    let mut test_idx = test_idx.to_vec();
    let mut train_idx = train_idx.to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    let train = dataset.subset(&train_idx, format!("{}-train", dataset.name))?;
    let test = dataset.subset(&test_idx, format!("{}-test", dataset.name))?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn toy(n: usize) -> Dataset {
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = (0..n).map(|i| i % 3).collect();
        Dataset::new("toy", features, labels, 3).unwrap()
    }

    #[test]
    fn dataset_validates_counts_and_labels() {
        let f = arr2(&[[0.0, 1.0], [2.0, 3.0]]);
        assert!(Dataset::new("x", f.clone(), vec![0], 2).is_err());
        assert!(Dataset::new("x", f.clone(), vec![0, 2], 2).is_err());
        assert!(Dataset::new("x", f, vec![0, 1], 2).is_ok());
    }

    #[test]
    fn batches_partition_the_index_set() {
        let ds = toy(4);
        let plan = BatchPlan { batch_size: 2, seed: 7, drop_last: false };
        let batches = minibatches(&ds, &plan, 0).unwrap();
        assert_eq!(batches.len(), 2);
        let mut all: Vec<usize> = batches.concat();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn batches_deterministic_per_seed_epoch() {
        let ds = toy(32);
        let plan = BatchPlan { batch_size: 5, seed: 42, drop_last: false };
        assert_eq!(
            minibatches(&ds, &plan, 3).unwrap(),
            minibatches(&ds, &plan, 3).unwrap()
        );
        assert_ne!(
            minibatches(&ds, &plan, 3).unwrap(),
            minibatches(&ds, &plan, 4).unwrap()
        );
    }

    #[test]
    fn remainder_batch_kept_unless_dropped() {
        let ds = toy(5);
        let plan = BatchPlan { batch_size: 2, seed: 0, drop_last: false };
        let sizes: Vec<usize> = minibatches(&ds, &plan, 0).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 2, 1]);

        let plan = BatchPlan { drop_last: true, ..plan };
        let sizes: Vec<usize> = minibatches(&ds, &plan, 0).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 2]);
    }

    #[test]
    fn oversized_batch_is_a_config_error() {
        let ds = toy(3);
        let plan = BatchPlan { batch_size: 4, seed: 0, drop_last: false };
        assert!(matches!(minibatches(&ds, &plan, 0), Err(Error::Config(_))));
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let ds = toy(10);
        let (train, test) = split(&ds, 0.2, 11).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
        // Union of the two splits recovers every original row.
        let key = |d: &Dataset| {
            let mut rows: Vec<Vec<u64>> = (0..d.len())
                .map(|i| d.features.row(i).iter().map(|v| v.to_bits()).collect())
                .collect();
            rows.sort();
            rows
        };
        let mut merged = key(&train);
        merged.extend(key(&test));
        merged.sort();
        assert_eq!(merged, key(&ds));
    }

    #[test]
    fn split_deterministic() {
        let ds = toy(20);
        let (a, _) = split(&ds, 0.25, 5).unwrap();
        let (b, _) = split(&ds, 0.25, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let ds = toy(10);
        for f in [0.0, 1.0, -0.5, 2.0] {
            assert!(split(&ds, f, 0).is_err());
        }
    }
}
