//! Dataset readers: IDX (MNIST, Fashion-MNIST), CIFAR binary batches and
//! numeric CSV time series cut into sliding windows.

use std::fs;
use std::path::{Path, PathBuf};

use ftp_core::train::Dataset;
use ftp_core::{Rng, Tensor};

use crate::error::{LabError, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
pub const CIFAR_PIXELS: usize = 3072;
/// Environment variable naming the dataset root directory.
pub const DATA_ROOT_ENV: &str = "FTP_DATA_ROOT";

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| LabError::io(path, e))
}

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// IDX image file: `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let header = |i: usize| be_u32(bytes, 4 * i).ok_or_else(|| LabError::parse(path, "truncated IDX header"));
    let magic = header(0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(LabError::parse(path, format!("bad IDX image magic {magic:#010x}")));
    }
    let (n, rows, cols) = (header(1)? as usize, header(2)? as usize, header(3)? as usize);
    let body = &bytes[16..];
    let want = n * rows * cols;
    if body.len() != want {
        return Err(LabError::parse(
            path,
            format!("IDX image body has {} bytes, header implies {want}", body.len()),
        ));
    }
    Ok((n, rows, cols, body.to_vec()))
}

/// IDX label file: one byte per example.
pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    let header = |i: usize| be_u32(bytes, 4 * i).ok_or_else(|| LabError::parse(path, "truncated IDX header"));
    let magic = header(0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(LabError::parse(path, format!("bad IDX label magic {magic:#010x}")));
    }
    let n = header(1)? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(LabError::parse(
            path,
            format!("IDX label body has {} bytes, header implies {n}", body.len()),
        ));
    }
    Ok(body.to_vec())
}

pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let n = pixels.len() / (rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IDX_IMAGES_MAGIC, n as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn one_hot(labels: &[usize], classes: usize) -> Tensor {
    let mut y = Tensor::zeros(&[labels.len(), classes]);
    for (r, &l) in labels.iter().enumerate() {
        y.set(&[r, l], 1.0);
    }
    y
}

fn pixels_to_unit(pixels: &[u8], n: usize, features: usize) -> Tensor {
    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    Tensor::matrix(n, features, data).expect("pixel count checked by the parser")
}

/// Images scaled to `[0, 1]` and flattened; labels one-hot over 10 classes.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    let (n, rows, cols, pixels) = parse_idx_images(&read(images)?, images)?;
    let raw = parse_idx_labels(&read(labels)?, labels)?;
    if raw.len() != n {
        return Err(LabError::parse(
            labels,
            format!("{} labels for {n} images in {}", raw.len(), images.display()),
        ));
    }
    if let Some(bad) = raw.iter().find(|&&l| l >= 10) {
        return Err(LabError::parse(labels, format!("label {bad} outside 0..10")));
    }
    let labels: Vec<usize> = raw.iter().map(|&l| l as usize).collect();
    Ok(Dataset::new(pixels_to_unit(&pixels, n, rows * cols), one_hot(&labels, 10))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CifarKind {
    /// One label byte per record.
    Ten,
    /// Coarse and fine label bytes; the fine label is used.
    Hundred,
}

impl CifarKind {
    pub fn classes(self) -> usize {
        match self {
            CifarKind::Ten => 10,
            CifarKind::Hundred => 100,
        }
    }

    fn label_bytes(self) -> usize {
        match self {
            CifarKind::Ten => 1,
            CifarKind::Hundred => 2,
        }
    }

    pub fn record_len(self) -> usize {
        self.label_bytes() + CIFAR_PIXELS
    }
}

/// Labels and channel-planar pixels of every record in one batch file.
pub fn parse_cifar(bytes: &[u8], kind: CifarKind, path: &Path) -> Result<(Vec<usize>, Vec<u8>)> {
    let rec = kind.record_len();
    if bytes.is_empty() || bytes.len() % rec != 0 {
        return Err(LabError::parse(
            path,
            format!("{} bytes is not a whole number of {rec}-byte records", bytes.len()),
        ));
    }
    let n = bytes.len() / rec;
    let mut labels = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n * CIFAR_PIXELS);
    for r in bytes.chunks_exact(rec) {
        let label = r[kind.label_bytes() - 1] as usize;
        if label >= kind.classes() {
            return Err(LabError::parse(path, format!("label {label} outside 0..{}", kind.classes())));
        }
        labels.push(label);
        pixels.extend_from_slice(&r[kind.label_bytes()..]);
    }
    Ok((labels, pixels))
}

pub fn encode_cifar_record(kind: CifarKind, coarse: u8, fine: u8, pixels: &[u8; CIFAR_PIXELS]) -> Vec<u8> {
    let mut out = Vec::with_capacity(kind.record_len());
    if kind == CifarKind::Hundred {
        out.push(coarse);
    }
    out.push(fine);
    out.extend_from_slice(pixels);
    out
}

/// Concatenation of the given batch files, pixels scaled to `[0, 1]` in
/// R, G, B plane order.
pub fn load_cifar(files: &[PathBuf], kind: CifarKind) -> Result<Dataset> {
    if files.is_empty() {
        return Err(LabError::Config("no CIFAR batch files given".into()));
    }
    let (mut labels, mut pixels) = (Vec::new(), Vec::new());
    for f in files {
        let (l, p) = parse_cifar(&read(f)?, kind, f)?;
        labels.extend(l);
        pixels.extend(p);
    }
    let n = labels.len();
    Ok(Dataset::new(pixels_to_unit(&pixels, n, CIFAR_PIXELS), one_hot(&labels, kind.classes()))?)
}

/// `n` examples drawn without replacement by a seeded shuffle, kept in
/// their original order.
pub fn subset(data: &Dataset, n: usize, seed: u64) -> Dataset {
    if n >= data.len() {
        return data.clone();
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    Rng::new(seed).shuffle(&mut idx);
    let mut pick = idx[..n].to_vec();
    pick.sort_unstable();
    let (x, y) = data.batch(&pick);
    Dataset::new(x, y).expect("rows stay paired")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide each feature by its largest absolute training value.
    #[default]
    MaxAbs,
    /// Subtract the training mean and divide by the training standard
    /// deviation.
    ZScore,
}

impl std::str::FromStr for Normalization {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxabs" => Ok(Normalization::MaxAbs),
            "zscore" => Ok(Normalization::ZScore),
            other => Err(LabError::Config(format!("unknown normalization `{other}` (maxabs, zscore)"))),
        }
    }
}

/// Per-feature affine map `v ↦ (v − shift) / scale`; a zero scale maps the
/// feature to 0.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FeatureScaling {
    pub kind: &'static str,
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaling {
    fn fit(rows: &[Vec<f64>], kind: Normalization) -> Self {
        let f = rows[0].len();
        let n = rows.len() as f64;
        match kind {
            Normalization::MaxAbs => FeatureScaling {
                kind: "maxabs",
                shift: vec![0.0; f],
                scale: (0..f).map(|j| rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max)).collect(),
            },
            Normalization::ZScore => {
                let mean: Vec<f64> = (0..f).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
                let std = (0..f)
                    .map(|j| (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
                    .collect();
                FeatureScaling {
                    kind: "zscore",
                    shift: mean,
                    scale: std,
                }
            }
        }
    }

    pub fn apply(&self, j: usize, v: f64) -> f64 {
        if self.scale[j] == 0.0 {
            0.0
        } else {
            (v - self.shift[j]) / self.scale[j]
        }
    }
}

/// Sliding windows over a multivariate series, split chronologically.
#[derive(Debug, Clone)]
pub struct WindowedSeries {
    /// `x: [M_train × window × features]`, `y: [M_train × features]`.
    pub train: Dataset,
    pub test: Dataset,
    pub window: usize,
    /// Fitted on the source rows covered by training windows and targets.
    pub scaling: FeatureScaling,
}

/// Window `t` holds source rows `t .. t + window` and targets row
/// `t + window`.
pub fn window_rows(
    rows: &[Vec<f64>],
    window: usize,
    normalization: Normalization,
    train_fraction: f64,
) -> Result<WindowedSeries> {
    if window == 0 {
        return Err(LabError::Config("window must be positive".into()));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(LabError::Config(format!("train fraction {train_fraction} outside [0, 1]")));
    }
    let t = rows.len();
    if t <= window {
        return Err(LabError::Data(format!("series of {t} steps is too short for a {window}-step window")));
    }
    let f = rows[0].len();
    if f == 0 || rows.iter().any(|r| r.len() != f) {
        return Err(LabError::Data("rows must share a nonzero feature count".into()));
    }
    let m = t - window;
    let m_train = (train_fraction * m as f64).floor() as usize;
    if m_train == 0 || m_train == m {
        return Err(LabError::Data(format!(
            "train fraction {train_fraction} of {m} windows leaves an empty split"
        )));
    }
    let scaling = FeatureScaling::fit(&rows[..m_train + window], normalization);
    let norm: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().enumerate().map(|(j, &v)| scaling.apply(j, v)).collect())
        .collect();
    let build = |range: std::ops::Range<usize>| -> Result<Dataset> {
        let count = range.len();
        let mut x = Vec::with_capacity(count * window * f);
        let mut y = Vec::with_capacity(count * f);
        for s in range {
            for r in &norm[s..s + window] {
                x.extend_from_slice(r);
            }
            y.extend_from_slice(&norm[s + window]);
        }
        Ok(Dataset::new(Tensor::new(vec![count, window, f], x)?, Tensor::matrix(count, f, y)?)?)
    };
    Ok(WindowedSeries {
        train: build(0..m_train)?,
        test: build(m_train..m)?,
        window,
        scaling,
    })
}

/// Numeric CSV, one row per time step. With `header` the first record is
/// skipped.
pub fn read_series_csv(path: &Path, header: bool) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => LabError::io(path, io),
            other => LabError::parse(path, format!("{other:?}")),
        })?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| LabError::parse(path, e.to_string()))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    LabError::parse(path, format!("row {} column {}: `{cell}` is not a finite number", i + 1, j + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn window_series(
    path: &Path,
    window: usize,
    normalization: Normalization,
    header: bool,
    train_fraction: f64,
) -> Result<WindowedSeries> {
    window_rows(&read_series_csv(path, header)?, window, normalization, train_fraction)
}

/// `features` phase-shifted sines with period `period` plus Gaussian noise.
pub fn noisy_sine(steps: usize, features: usize, period: f64, noise: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = Rng::new(seed);
    (0..steps)
        .map(|t| {
            (0..features)
                .map(|j| {
                    let phase = j as f64 * std::f64::consts::PI / features as f64;
                    (2.0 * std::f64::consts::PI * t as f64 / period + phase).sin() + noise * rng.normal()
                })
                .collect()
        })
        .collect()
}

/// Directory holding datasets: `$FTP_DATA_ROOT`, else `data`.
pub fn data_root() -> PathBuf {
    std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

/// Train and test splits of a named image dataset below `root`:
/// `mnist`/`fmnist` as IDX files, `cifar10`/`cifar100` as the published
/// binary batches.
pub fn load_named(name: &str, root: &Path) -> Result<(Dataset, Dataset)> {
    match name {
        "mnist" | "fmnist" => {
            let dir = root.join(name);
            let train = load_idx(&dir.join("train-images-idx3-ubyte"), &dir.join("train-labels-idx1-ubyte"))?;
            let test = load_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte"))?;
            Ok((train, test))
        }
        "cifar10" => {
            let dir = root.join("cifar-10-batches-bin");
            let train: Vec<PathBuf> = (1..=5).map(|i| dir.join(format!("data_batch_{i}.bin"))).collect();
            Ok((
                load_cifar(&train, CifarKind::Ten)?,
                load_cifar(&[dir.join("test_batch.bin")], CifarKind::Ten)?,
            ))
        }
        "cifar100" => {
            let dir = root.join("cifar-100-binary");
            Ok((
                load_cifar(&[dir.join("train.bin")], CifarKind::Hundred)?,
                load_cifar(&[dir.join("test.bin")], CifarKind::Hundred)?,
            ))
        }
        other => Err(LabError::Config(format!(
            "unknown image dataset `{other}` (mnist, fmnist, cifar10, cifar100)"
        ))),
    }
}
