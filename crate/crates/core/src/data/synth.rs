//! Synthetic Gaussian-blob classification data, for download-free runs.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// `q` Gaussian clusters in d dimensions with seeded centers.
///
/// Centers are drawn uniformly from [0.2, 0.8] per coordinate and samples get
/// per-coordinate noise of standard deviation `spread`, clamped to [0,1] so
/// the features match the loaders' byte-derived range. Labels cycle through
/// the classes, giving balanced counts. Deterministic for a fixed seed.
pub fn synth_blobs(n: usize, d: usize, q: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if q == 0 || d == 0 {
        return Err(Error::Config("class count and dimension must be positive".into()));
    }
    if n < q {
        return Err(Error::Config(format!("need at least {q} samples for {q} classes, got {n}")));
    }
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::Config(format!("spread must be positive, got {spread}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..q)
        .map(|_| (0..d).map(|_| rng.gen_range(0.2..0.8)).collect())
        .collect();

    let mut features = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % q;
        labels.push(class);
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            features[[i, j]] = (centers[class][j] + spread * z).clamp(0.0, 1.0);
        }
    }
    Dataset::new(format!("blobs-n{n}-d{d}-q{q}"), features, labels, q)
}
