//! Datasets: IDX ingestion, synthetic blobs, splits, and a binary container.
//!
//! Features are always normalized to `[0, 1]` on the way in, so attack budgets
//! are expressed in the same units regardless of source.

use std::io::Read;
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub normalization: String,
}

/// `n` feature rows in `[0, 1]^d` with labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, classes: usize, meta: DatasetMeta) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::CountMismatch {
                images: features.nrows(),
                labels: labels.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::Format {
                what: "dataset",
                detail: format!("label {l} >= {classes} classes"),
            });
        }
        if features.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Format {
                what: "dataset",
                detail: "features must lie in [0, 1]".into(),
            });
        }
        Ok(Self {
            features,
            labels,
            classes,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
            meta: self.meta.clone(),
        }
    }

    /// The first `n` rows (or all of them).
    pub fn head(&self, n: usize) -> Self {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Same labels, new features (e.g. adversarial copies).
    pub fn with_features(&self, features: Array2<f64>, source: impl Into<String>) -> Result<Self> {
        Self::new(
            features,
            self.labels.clone(),
            self.classes,
            DatasetMeta {
                source: source.into(),
                normalization: self.meta.normalization.clone(),
            },
        )
    }
}

/// Raw IDX image block.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` bytes, row-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Truncated {
            what,
            needed: offset + 4,
            available: bytes.len(),
        })
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    const WHAT: &str = "IDX image file";
    let magic = be_u32(bytes, 0, WHAT)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            what: WHAT,
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let rows = be_u32(bytes, 8, WHAT)? as usize;
    let cols = be_u32(bytes, 12, WHAT)? as usize;
    let needed = 16 + count * rows * cols;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            what: WHAT,
            needed,
            available: bytes.len(),
        });
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels: bytes[16..needed].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    const WHAT: &str = "IDX label file";
    let magic = be_u32(bytes, 0, WHAT)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            what: WHAT,
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            what: WHAT,
            needed,
            available: bytes.len(),
        });
    }
    Ok(bytes[8..needed].to_vec())
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IDX_IMAGES_MAGIC,
        images.count() as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Read a file, inflating it first if it is gzip-compressed.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Assemble a dataset from parsed IDX blocks; pixels are divided by 255.
pub fn dataset_from_idx(images: &IdxImages, labels: &[u8], source: &str) -> Result<Dataset> {
    if images.count() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.count(),
            labels: labels.len(),
        });
    }
    let d = images.rows * images.cols;
    let features = Array2::from_shape_vec(
        (labels.len(), d),
        images.pixels.iter().map(|&b| b as f64 / 255.0).collect(),
    )
    .map_err(|e| Error::Format {
        what: "IDX image file",
        detail: e.to_string(),
    })?;
    let labels: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    Dataset::new(
        features,
        labels,
        classes,
        DatasetMeta {
            source: source.into(),
            normalization: "pixel / 255".into(),
        },
    )
}

/// Load an IDX image/label pair (plain or gzip).
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = parse_idx_images(&read_maybe_gz(images_path)?)?;
    let labels = parse_idx_labels(&read_maybe_gz(labels_path)?)?;
    dataset_from_idx(&images, &labels, &images_path.display().to_string())
}

/// Inverse of [`dataset_from_idx`]: features are scaled back to bytes.
pub fn dataset_to_idx(data: &Dataset, rows: usize, cols: usize) -> Result<(IdxImages, Vec<u8>)> {
    if rows * cols != data.dim() {
        return Err(Error::Dimension {
            expected: data.dim(),
            got: rows * cols,
        });
    }
    if data.classes > 256 {
        return Err(Error::param("IDX labels are single bytes"));
    }
    let pixels = data.features.iter().map(|v| (v * 255.0).round() as u8).collect();
    let labels = data.labels.iter().map(|&l| l as u8).collect();
    Ok((IdxImages { rows, cols, pixels }, labels))
}

/// Gaussian clusters around seeded centers in `[0.2, 0.8]^d`, clipped to `[0, 1]`.
/// Rows are grouped by class.
pub fn synthetic_blobs(classes: usize, dim: usize, n_per_class: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 || dim == 0 {
        return Err(Error::param("blobs need at least 2 classes and 1 dimension"));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::param("spread must be >= 0"));
    }
    let centers = blob_centers(classes, dim, seed);
    let mut rng = seed::rng(seed::derive(seed, &[seed::tag("blob-points")]));
    let n = classes * n_per_class;
    let mut features = Array2::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for class in 0..classes {
        for j in 0..n_per_class {
            let mut row = features.row_mut(class * n_per_class + j);
            for (v, c) in row.iter_mut().zip(centers.row(class)) {
                let z: f64 = rng.sample(StandardNormal);
                *v = (c + spread * z).clamp(0.0, 1.0);
            }
            labels.push(class);
        }
    }
    Dataset::new(
        features,
        labels,
        classes,
        DatasetMeta {
            source: format!("blobs(C={classes}, d={dim}, n={n_per_class}, spread={spread}, seed={seed})"),
            normalization: "clipped to [0, 1]".into(),
        },
    )
}

/// The centers [`synthetic_blobs`] uses for a given seed.
pub fn blob_centers(classes: usize, dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = seed::rng(seed::derive(seed, &[seed::tag("blob-centers")]));
    Array2::from_shape_fn((classes, dim), |_| rng.random_range(0.2..=0.8))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
            seed: 0,
        }
    }
}

/// Largest-remainder apportionment of `n` items over `fractions`.
pub fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    let assigned: usize = sizes.iter().sum();
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

/// Seeded shuffle, then partition into train/val/test.
///
/// Every class present in the input is kept present in the train part by
/// swapping in one held-out example of any class the shuffle left out.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let fr = [spec.train, spec.val, spec.test];
    if fr.iter().any(|&f| !(f > 0.0)) || (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::param("split fractions must be positive and sum to 1"));
    }
    let sizes = apportion(data.len(), &fr);
    if sizes.contains(&0) {
        return Err(Error::param(format!(
            "split of {} rows leaves an empty partition ({sizes:?})",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seed::rng(spec.seed));

    let n_train = sizes[0];
    for class in 0..data.classes {
        let in_train = order[..n_train].iter().any(|&i| data.labels[i] == class);
        if in_train {
            continue;
        }
        let Some(pos) = order[n_train..].iter().position(|&i| data.labels[i] == class) else {
            continue;
        };
        let mut counts = vec![0usize; data.classes];
        for &i in &order[..n_train] {
            counts[data.labels[i]] += 1;
        }
        if let Some(victim) = (0..n_train).rev().find(|&j| counts[data.labels[order[j]]] > 1) {
            order.swap(victim, n_train + pos);
        }
    }
    let (train, rest) = order.split_at(n_train);
    let (val, test) = rest.split_at(sizes[1]);
    Ok((data.subset(train), data.subset(val), data.subset(test)))
}

const CONTAINER_MAGIC: &[u8; 4] = b"DDDS";
const CONTAINER_VERSION: u32 = 1;

/// Binary container, little-endian:
///
/// ```text
/// "DDDS" | version u32 | n u64 | d u64 | classes u32
/// | source_len u32 | source utf8 | norm_len u32 | norm utf8
/// | n*d f64 features (row-major) | n u32 labels
/// ```
pub fn encode_dataset(data: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + data.features.len() * 8 + data.len() * 4);
    out.extend_from_slice(CONTAINER_MAGIC);
    out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    out.extend_from_slice(&(data.len() as u64).to_le_bytes());
    out.extend_from_slice(&(data.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(data.classes as u32).to_le_bytes());
    for s in [&data.meta.source, &data.meta.normalization] {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    }
    for v in data.features.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &l in &data.labels {
        out.extend_from_slice(&(l as u32).to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(Error::Truncated {
            what: "dataset container",
            needed: self.pos.saturating_add(n),
            available: self.bytes.len(),
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| Error::Format {
            what: "dataset container",
            detail: e.to_string(),
        })
    }
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.take(4)?;
    if magic != CONTAINER_MAGIC {
        return Err(Error::BadMagic {
            what: "dataset container",
            expected: u32::from_be_bytes(*CONTAINER_MAGIC),
            found: u32::from_be_bytes(magic.try_into().unwrap()),
        });
    }
    let version = c.u32()?;
    if version != CONTAINER_VERSION {
        return Err(Error::Format {
            what: "dataset container",
            detail: format!("unsupported version {version}"),
        });
    }
    let n = c.u64()? as usize;
    let d = c.u64()? as usize;
    let classes = c.u32()? as usize;
    let source = c.string()?;
    let normalization = c.string()?;
    let body = c.take(n.checked_mul(d).and_then(|x| x.checked_mul(8)).ok_or_else(|| Error::Format {
        what: "dataset container",
        detail: "size overflow".into(),
    })?)?;
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let labels = c
        .take(n * 4)?
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
        .collect();
    let features = Array2::from_shape_vec((n, d), values).map_err(|e| Error::Format {
        what: "dataset container",
        detail: e.to_string(),
    })?;
    Dataset::new(features, labels, classes, DatasetMeta { source, normalization })
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, encode_dataset(data)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    decode_dataset(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two 3x3 images and labels (7, 2), encoded by hand.
    fn fixture() -> (Vec<u8>, Vec<u8>) {
        let mut img = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 3];
        img.extend_from_slice(&[0, 51, 102, 153, 204, 255, 0, 0, 0]);
        img.extend_from_slice(&[255, 255, 255, 0, 0, 0, 1, 2, 3]);
        let lab = vec![0, 0, 8, 1, 0, 0, 0, 2, 7, 2];
        (img, lab)
    }

    #[test]
    fn hand_built_fixture() {
        let (img, lab) = fixture();
        let images = parse_idx_images(&img).unwrap();
        let labels = parse_idx_labels(&lab).unwrap();
        let d = dataset_from_idx(&images, &labels, "fixture").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 9);
        assert_eq!(d.labels, vec![7, 2]);
        assert_eq!(d.classes, 8);
        let expect0 = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 0.0, 0.0, 0.0];
        for (a, b) in d.row(0).iter().zip(expect0) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(d.row(1)[8], 3.0 / 255.0);
    }

    #[test]
    fn distinct_parse_errors() {
        let (img, lab) = fixture();
        assert!(matches!(parse_idx_images(&img[..10]), Err(Error::Truncated { .. })));
        assert!(matches!(parse_idx_images(&img[..20]), Err(Error::Truncated { .. })));
        assert!(matches!(parse_idx_images(&lab), Err(Error::BadMagic { .. })));
        assert!(matches!(parse_idx_labels(&img), Err(Error::BadMagic { .. })));
        assert!(matches!(parse_idx_labels(&lab[..9]), Err(Error::Truncated { .. })));
        let images = parse_idx_images(&img).unwrap();
        assert!(matches!(
            dataset_from_idx(&images, &[1], "x"),
            Err(Error::CountMismatch { images: 2, labels: 1 })
        ));
    }

    #[test]
    fn load_plain_and_gzip_files() {
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = fixture();
        std::fs::write(dir.path().join("i"), &img).unwrap();
        std::fs::write(dir.path().join("l"), &lab).unwrap();
        let mut gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        gz.write_all(&img).unwrap();
        std::fs::write(dir.path().join("i.gz"), gz.finish().unwrap()).unwrap();
        let plain = load_idx(&dir.path().join("i"), &dir.path().join("l")).unwrap();
        let zipped = load_idx(&dir.path().join("i.gz"), &dir.path().join("l")).unwrap();
        assert_eq!(plain.features, zipped.features);
        assert!(matches!(
            load_idx(&dir.path().join("missing"), &dir.path().join("l")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn idx_round_trip_is_byte_exact() {
        let (img, lab) = fixture();
        let d = dataset_from_idx(&parse_idx_images(&img).unwrap(), &parse_idx_labels(&lab).unwrap(), "f").unwrap();
        let (images, labels) = dataset_to_idx(&d, 3, 3).unwrap();
        assert_eq!(encode_idx_images(&images), img);
        assert_eq!(encode_idx_labels(&labels), lab);
    }

    proptest! {
        #[test]
        fn idx_round_trip(pixels in prop::collection::vec(any::<u8>(), 12..=12usize * 5)) {
            let n = pixels.len() / 12;
            let images = IdxImages { rows: 3, cols: 4, pixels: pixels[..n * 12].to_vec() };
            let labels: Vec<u8> = (0..n as u8).collect();
            let d = dataset_from_idx(&images, &labels, "p").unwrap();
            let (back, back_labels) = dataset_to_idx(&d, 3, 4).unwrap();
            prop_assert_eq!(encode_idx_images(&back), encode_idx_images(&images));
            prop_assert_eq!(back_labels, labels);
        }
    }

    #[test]
    fn blobs_deterministic_and_degenerate() {
        let a = synthetic_blobs(3, 4, 20, 0.05, 7).unwrap();
        assert_eq!(a, synthetic_blobs(3, 4, 20, 0.05, 7).unwrap());
        assert_ne!(a.features, synthetic_blobs(3, 4, 20, 0.05, 8).unwrap().features);
        let flat = synthetic_blobs(3, 4, 5, 0.0, 7).unwrap();
        let centers = blob_centers(3, 4, 7);
        for i in 0..flat.len() {
            assert_eq!(flat.row(i), centers.row(flat.labels[i]));
        }
        assert!(centers.iter().all(|c| (0.2..=0.8).contains(c)));
        assert!(synthetic_blobs(1, 4, 5, 0.1, 0).is_err());
        assert!(synthetic_blobs(2, 0, 5, 0.1, 0).is_err());
    }

    /// Standard normal CDF by composite Simpson quadrature of the density.
    fn phi(x: f64) -> f64 {
        let (lo, n) = (-12.0, 20_000);
        let h = (x - lo) / n as f64;
        let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(lo) + f(x);
        for i in 1..n {
            s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn nearest_center_error_matches_overlap() {
        // 1-d, so clipping never moves a point across the midpoint
        let (spread, n) = (0.15, 20_000);
        let d = synthetic_blobs(2, 1, n, spread, 3).unwrap();
        let c = blob_centers(2, 1, 3);
        let (c0, c1) = (c[[0, 0]], c[[1, 0]]);
        let errors = (0..d.len())
            .filter(|&i| {
                let x = d.row(i)[0];
                let guess = usize::from((x - c1).abs() < (x - c0).abs());
                guess != d.labels[i]
            })
            .count();
        let rate = errors as f64 / d.len() as f64;
        let bayes = phi(-(c1 - c0).abs() / (2.0 * spread));
        let se = (bayes * (1.0 - bayes) / d.len() as f64).sqrt();
        assert!((rate - bayes).abs() < 4.0 * se, "rate {rate} vs {bayes} (se {se})");
    }

    #[test]
    fn apportion_largest_remainder() {
        assert_eq!(apportion(10, &[0.8, 0.1, 0.1]), vec![8, 1, 1]);
        assert_eq!(apportion(7, &[0.5, 0.25, 0.25]), vec![3, 2, 2]);
        assert_eq!(apportion(9, &[0.5, 0.25, 0.25]), vec![5, 2, 2]);
        assert_eq!(apportion(3, &[1.0 / 3.0; 3]), vec![1, 1, 1]);
        assert_eq!(apportion(11, &[0.6, 0.2, 0.2]).iter().sum::<usize>(), 11);
    }

    #[test]
    fn split_partitions() {
        let d = synthetic_blobs(4, 2, 25, 0.1, 1).unwrap();
        let spec = SplitSpec { seed: 5, ..SplitSpec::default() };
        let (tr, va, te) = split(&d, &spec).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (80, 10, 10));
        assert_eq!(split(&d, &spec).unwrap().0, tr);

        // union reconstructs the input as a multiset of rows
        let mut all: Vec<Vec<u64>> = [&tr, &va, &te]
            .iter()
            .flat_map(|p| (0..p.len()).map(|i| p.row(i).iter().map(|v| v.to_bits()).chain([p.labels[i] as u64]).collect::<Vec<_>>()).collect::<Vec<_>>())
            .collect();
        let mut orig: Vec<Vec<u64>> = (0..d.len())
            .map(|i| d.row(i).iter().map(|v| v.to_bits()).chain([d.labels[i] as u64]).collect())
            .collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_keeps_rare_class_in_train() {
        // one example of class 2 among many
        let mut d = synthetic_blobs(3, 1, 40, 0.1, 2).unwrap();
        let keep: Vec<usize> = (0..d.len()).filter(|&i| d.labels[i] != 2).chain([80]).collect();
        d = d.subset(&keep);
        for s in 0..20 {
            let (tr, _, _) = split(&d, &SplitSpec { train: 0.5, val: 0.25, test: 0.25, seed: s }).unwrap();
            assert!(tr.class_counts().iter().all(|&c| c > 0), "seed {s}");
        }
    }

    #[test]
    fn split_errors() {
        let d = synthetic_blobs(2, 1, 2, 0.1, 1).unwrap();
        assert!(split(&d, &SplitSpec { train: 0.9, val: 0.05, test: 0.05, seed: 0 }).is_err());
        assert!(split(&d, &SplitSpec { train: 0.5, val: 0.5, test: 0.0, seed: 0 }).is_err());
        assert!(split(&d, &SplitSpec { train: 0.5, val: 0.3, test: 0.3, seed: 0 }).is_err());
    }

    #[test]
    fn container_round_trip_and_errors() {
        let d = synthetic_blobs(3, 5, 4, 0.2, 9).unwrap();
        let bytes = encode_dataset(&d);
        assert_eq!(decode_dataset(&bytes).unwrap(), d);
        assert!(matches!(decode_dataset(&bytes[..bytes.len() - 1]), Err(Error::Truncated { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_dataset(&bad), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn rejects_out_of_range() {
        let meta = DatasetMeta { source: "t".into(), normalization: "none".into() };
        let f = Array2::from_elem((1, 2), 1.5);
        assert!(Dataset::new(f, vec![0], 2, meta.clone()).is_err());
        let f = Array2::zeros((1, 2));
        assert!(Dataset::new(f.clone(), vec![2], 2, meta.clone()).is_err());
        assert!(Dataset::new(f, vec![0, 1], 2, meta).is_err());
    }
}
