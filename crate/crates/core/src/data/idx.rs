//! IDX binary format (the MNIST-family container): big-endian magic and
//! dimension header followed by raw unsigned bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::data::Dataset;
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 2051; // 0x00000803
const LABEL_MAGIC: u32 = 2049; // 0x00000801

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn read_u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.bytes.len() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                format!("{}: truncated header", self.path.display()),
            )));
        }
        let v = u32::from_be_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn read_exact(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                format!(
                    "{}: expected {len} more bytes, found {}",
                    self.path.display(),
                    self.bytes.len() - self.pos
                ),
            )));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }
}

/// Parses an IDX image/label file pair into a dataset with pixel values
/// scaled to [0,1]. The class count is the largest label plus one.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let image_bytes = fs::read(images_path)?;
    let label_bytes = fs::read(labels_path)?;
    parse_idx(&image_bytes, &label_bytes, images_path, labels_path)
}

pub(crate) fn parse_idx(
    image_bytes: &[u8],
    label_bytes: &[u8],
    images_path: &Path,
    labels_path: &Path,
) -> Result<Dataset> {
    let mut img = Cursor { bytes: image_bytes, pos: 0, path: images_path };
    let magic = img.read_u32()?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "{}: expected image magic {IMAGE_MAGIC}, got {magic}",
            images_path.display()
        )));
    }
    let n = img.read_u32()? as usize;
    let rows = img.read_u32()? as usize;
    let cols = img.read_u32()? as usize;
    let pixels = img.read_exact(n * rows * cols)?;

    let mut lbl = Cursor { bytes: label_bytes, pos: 0, path: labels_path };
    let magic = lbl.read_u32()?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format(format!(
            "{}: expected label magic {LABEL_MAGIC}, got {magic}",
            labels_path.display()
        )));
    }
    let label_n = lbl.read_u32()? as usize;
    if label_n != n {
        return Err(Error::Consistency(format!(
            "{n} images but {label_n} labels"
        )));
    }
    let raw_labels = lbl.read_exact(n)?;

    let d = rows * cols;
    let features = Array2::from_shape_vec(
        (n, d),
        pixels.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
    .expect("pixel count matches header dims");
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let class_count = labels.iter().max().map_or(0, |&m| m + 1);
    Dataset::new(
        images_path.file_stem().map_or_else(
            || "idx".to_string(),
            |s| s.to_string_lossy().into_owned(),
        ),
        features,
        labels,
        class_count,
    )
}

/// Writes a dataset as an IDX image/label file pair. Feature values are
/// expected in [0,1] and are quantized back to bytes with rounding, so a
/// dataset that came from `load_idx` round-trips exactly.
pub fn write_idx_files(
    dataset: &Dataset,
    rows: usize,
    cols: usize,
    images_path: &Path,
    labels_path: &Path,
) -> Result<()> {
    if rows * cols != dataset.feature_dim() {
        return Err(Error::Config(format!(
            "{rows}x{cols} does not match feature dimension {}",
            dataset.feature_dim()
        )));
    }
    if dataset.class_count > 256 {
        return Err(Error::Config("IDX labels are single bytes".into()));
    }
    let n = dataset.len();

    let mut img = fs::File::create(images_path)?;
    img.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    img.write_all(&(n as u32).to_be_bytes())?;
    img.write_all(&(rows as u32).to_be_bytes())?;
    img.write_all(&(cols as u32).to_be_bytes())?;
    let mut pixels = Vec::with_capacity(n * rows * cols);
    for v in dataset.features.iter() {
        pixels.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    img.write_all(&pixels)?;

    let mut lbl = fs::File::create(labels_path)?;
    lbl.write_all(&LABEL_MAGIC.to_be_bytes())?;
    lbl.write_all(&(n as u32).to_be_bytes())?;
    let bytes: Vec<u8> = dataset.labels.iter().map(|&l| l as u8).collect();
    lbl.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_fixture() -> Vec<u8> {
        // Two 2×2 images: magic 2051, n=2, rows=2, cols=2, then 8 pixel bytes.
        let mut b = Vec::new();
        b.extend_from_slice(&2051u32.to_be_bytes());
        b.extend_from_slice(&2u32.to_be_bytes());
        b.extend_from_slice(&2u32.to_be_bytes());
        b.extend_from_slice(&2u32.to_be_bytes());
        b.extend_from_slice(&[0, 51, 102, 153, 204, 255, 25, 50]);
        b
    }

    fn label_fixture() -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(&2049u32.to_be_bytes());
        b.extend_from_slice(&2u32.to_be_bytes());
        b.extend_from_slice(&[7, 3]);
        b
    }

    fn paths() -> (std::path::PathBuf, std::path::PathBuf) {
        ("imgs.idx".into(), "lbls.idx".into())
    }

    #[test]
    fn parses_hand_built_fixture() {
        let (ip, lp) = paths();
        let ds = parse_idx(&image_fixture(), &label_fixture(), &ip, &lp).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_dim(), 4);
        let expected = [
            [0.0, 51.0 / 255.0, 102.0 / 255.0, 153.0 / 255.0],
            [204.0 / 255.0, 1.0, 25.0 / 255.0, 50.0 / 255.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(ds.features[[i, j]], v);
            }
        }
        assert_eq!(ds.labels, vec![7, 3]);
        assert_eq!(ds.class_count, 8);
    }

    #[test]
    fn wrong_magic_is_a_format_error() {
        let (ip, lp) = paths();
        // Image file offered as labels: magic 2051 where 2049 is expected.
        let err = parse_idx(&image_fixture(), &image_fixture(), &ip, &lp).unwrap_err();
        match err {
            Error::Format(msg) => {
                assert!(msg.contains("2049"), "{msg}");
                assert!(msg.contains("2051"), "{msg}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn count_mismatch_is_a_consistency_error() {
        let (ip, lp) = paths();
        let mut labels = Vec::new();
        labels.extend_from_slice(&2049u32.to_be_bytes());
        labels.extend_from_slice(&3u32.to_be_bytes());
        labels.extend_from_slice(&[1, 2, 3]);
        assert!(matches!(
            parse_idx(&image_fixture(), &labels, &ip, &lp),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn truncated_file_is_an_io_error() {
        let (ip, lp) = paths();
        let mut short = image_fixture();
        short.truncate(short.len() - 3);
        assert!(matches!(
            parse_idx(&short, &label_fixture(), &ip, &lp),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn zero_image_file_is_an_empty_dataset() {
        let (ip, lp) = paths();
        let mut imgs = Vec::new();
        imgs.extend_from_slice(&2051u32.to_be_bytes());
        imgs.extend_from_slice(&0u32.to_be_bytes());
        imgs.extend_from_slice(&2u32.to_be_bytes());
        imgs.extend_from_slice(&2u32.to_be_bytes());
        let mut lbls = Vec::new();
        lbls.extend_from_slice(&2049u32.to_be_bytes());
        lbls.extend_from_slice(&0u32.to_be_bytes());
        let ds = parse_idx(&imgs, &lbls, &ip, &lp).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.class_count, 0);
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("imgs.idx");
        let lp = dir.path().join("lbls.idx");
        std::fs::write(&ip, image_fixture()).unwrap();
        std::fs::write(&lp, label_fixture()).unwrap();
        let ds = load_idx(&ip, &lp).unwrap();

        let ip2 = dir.path().join("imgs2.idx");
        let lp2 = dir.path().join("lbls2.idx");
        write_idx_files(&ds, 2, 2, &ip2, &lp2).unwrap();
        assert_eq!(std::fs::read(&ip2).unwrap(), image_fixture());
        assert_eq!(std::fs::read(&lp2).unwrap(), label_fixture());

        let reloaded = load_idx(&ip2, &lp2).unwrap();
        assert_eq!(reloaded.features, ds.features);
        assert_eq!(reloaded.labels, ds.labels);
    }
}
