//! CIFAR-10 binary batches: 3073-byte records, one label byte followed by
//! 3072 channel-major pixels.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::data::Dataset;
use crate::error::{Error, Result};

const RECORD_BYTES: usize = 3073;
const PIXELS: usize = 3072;
const CLASSES: usize = 10;

/// Concatenates the records of the given CIFAR-10 binary files, in order,
/// with pixels scaled to [0,1].
pub fn load_cifar10_binary(paths: &[impl AsRef<Path>]) -> Result<Dataset> {
    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        parse_records(&bytes, path, &mut features, &mut labels)?;
    }
    let n = labels.len();
    let features = Array2::from_shape_vec((n, PIXELS), features)
        .expect("record parsing yields n*3072 values");
    Dataset::new("cifar10", features, labels, CLASSES)
}

fn parse_records(
    bytes: &[u8],
    path: &Path,
    features: &mut Vec<f64>,
    labels: &mut Vec<usize>,
) -> Result<()> {
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(Error::Format(format!(
            "{}: {} bytes is not a multiple of the {RECORD_BYTES}-byte record size",
            path.display(),
            bytes.len()
        )));
    }
    for record in bytes.chunks_exact(RECORD_BYTES) {
        let label = record[0] as usize;
        if label >= CLASSES {
            return Err(Error::Consistency(format!(
                "{}: label byte {label} exceeds class 9",
                path.display()
            )));
        }
        labels.push(label);
        features.extend(record[1..].iter().map(|&b| f64::from(b) / 255.0));
    }
    Ok(())
}
