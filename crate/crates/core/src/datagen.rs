//! Synthetic binary datasets, standardization and stratified splitting.
//!
//! Three generators mirror the usual `make_classification` /
//! `make_circles` semantics without reproducing any library's exact
//! random stream:
//!
//! - linearly separable: one unit-covariance Gaussian per class at
//!   opposite hypercube vertices `+-c (1, ..., 1)`;
//! - multi-cluster: several Gaussians per class centered on distinct,
//!   randomly chosen hypercube vertices;
//! - circles: two noisy concentric circles.
//!
//! Labels alternate `+1, -1, +1, ...` so classes are balanced to within one
//! sample. Every generator is a pure function of its [`DatasetSpec`].

use std::f64::consts::TAU;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::axiscore::{class_counts, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    LinearSeparable,
    MultiCluster,
    Circles,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [DatasetKind::LinearSeparable, DatasetKind::MultiCluster, DatasetKind::Circles];

    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::LinearSeparable => "linear_separable",
            DatasetKind::MultiCluster => "multi_cluster",
            DatasetKind::Circles => "circles",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear_separable" | "linear" => Ok(DatasetKind::LinearSeparable),
            "multi_cluster" | "multi" => Ok(DatasetKind::MultiCluster),
            "circles" => Ok(DatasetKind::Circles),
            other => Err(Error::InvalidParameter(format!("unknown dataset kind '{other}'"))),
        }
    }
}

/// Everything needed to regenerate a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n_samples: usize,
    pub seed: u64,
    pub informative_features: usize,
    pub clusters_per_class: usize,
    /// Per-coordinate noise standard deviation (circles).
    pub noise_sigma: f64,
    /// Inner radius relative to the unit outer circle (circles).
    pub radius_factor: f64,
    /// Hypercube vertex coordinate magnitude for cluster centers.
    pub center_magnitude: f64,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, n_samples: usize, seed: u64) -> Self {
        Self {
            kind,
            n_samples,
            seed,
            informative_features: 4,
            clusters_per_class: if kind == DatasetKind::MultiCluster { 3 } else { 1 },
            noise_sigma: 0.1,
            radius_factor: 0.5,
            center_magnitude: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_samples < 4 {
            return bad(format!("n_samples = {} (need at least 4)", self.n_samples));
        }
        if self.informative_features == 0 || self.informative_features > 16 {
            return bad(format!("informative_features = {} outside 1..=16", self.informative_features));
        }
        if self.clusters_per_class == 0 || 2 * self.clusters_per_class > 1 << self.informative_features {
            return bad(format!(
                "clusters_per_class = {} needs {} distinct hypercube vertices",
                self.clusters_per_class,
                2 * self.clusters_per_class
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma = {}", self.noise_sigma));
        }
        if !(self.radius_factor > 0.0 && self.radius_factor < 1.0) {
            return bad(format!("radius_factor = {} outside (0, 1)", self.radius_factor));
        }
        if !(self.center_magnitude > 0.0 && self.center_magnitude.is_finite()) {
            return bad(format!("center_magnitude = {}", self.center_magnitude));
        }
        Ok(())
    }

    /// Input dimension of the generated samples.
    pub fn input_dim(&self) -> usize {
        match self.kind {
            DatasetKind::Circles => 2,
            _ => self.informative_features,
        }
    }
}

fn label_for(k: usize) -> i8 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn generate(spec: &DatasetSpec) -> Result<LabeledDataset> {
    match spec.kind {
        DatasetKind::LinearSeparable => gen_linear_separable(spec),
        DatasetKind::MultiCluster => gen_multi_cluster(spec),
        DatasetKind::Circles => gen_circles(spec),
    }
}

pub fn gen_linear_separable(spec: &DatasetSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.informative_features;
    let mut inputs = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for k in 0..spec.n_samples {
        let y = label_for(k);
        let center = f64::from(y) * spec.center_magnitude;
        let x: Vec<f64> = (0..m)
            .map(|_| center + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        inputs.push(x);
        labels.push(y);
    }
    LabeledDataset::new(inputs, labels)
}

/// Cluster centers per class for a multi-cluster spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLayout {
    pub positive: Vec<Vec<f64>>,
    pub negative: Vec<Vec<f64>>,
}

/// Picks `2 * clusters_per_class` distinct hypercube vertices on a stream
/// separate from the sample noise.
pub fn cluster_layout(spec: &DatasetSpec) -> Result<ClusterLayout> {
    spec.validate()?;
    let m = spec.informative_features;
    let c = spec.clusters_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let mut vertices: Vec<usize> = (0..1usize << m).collect();
    vertices.shuffle(&mut rng);
    let to_point = |v: usize| -> Vec<f64> {
        (0..m)
            .map(|j| if v >> j & 1 == 1 { spec.center_magnitude } else { -spec.center_magnitude })
            .collect()
    };
    Ok(ClusterLayout {
        positive: vertices[..c].iter().map(|&v| to_point(v)).collect(),
        negative: vertices[c..2 * c].iter().map(|&v| to_point(v)).collect(),
    })
}

pub fn gen_multi_cluster(spec: &DatasetSpec) -> Result<LabeledDataset> {
    let layout = cluster_layout(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = spec.clusters_per_class;
    let mut inputs = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    let (mut n_pos, mut n_neg) = (0usize, 0usize);
    for k in 0..spec.n_samples {
        let y = label_for(k);
        let center = if y == 1 {
            n_pos += 1;
            &layout.positive[(n_pos - 1) % c]
        } else {
            n_neg += 1;
            &layout.negative[(n_neg - 1) % c]
        };
        let x: Vec<f64> = center
            .iter()
            .map(|&mu| mu + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        inputs.push(x);
        labels.push(y);
    }
    LabeledDataset::new(inputs, labels)
}

/// Outer unit circle labeled `-1`, inner circle of radius `radius_factor`
/// labeled `+1`, uniform angles, then Gaussian noise per coordinate.
pub fn gen_circles(spec: &DatasetSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
    let mut inputs = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for k in 0..spec.n_samples {
        let y = label_for(k);
        let radius = if y == 1 { spec.radius_factor } else { 1.0 };
        let angle = rng.random_range(0.0..TAU);
        let (s, c) = angle.sin_cos();
        let x = vec![radius * c + noise.sample(&mut rng), radius * s + noise.sample(&mut rng)];
        inputs.push(x);
        labels.push(y);
    }
    LabeledDataset::new(inputs, labels)
}

/// Per-column affine transform `(x - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(dataset: &LabeledDataset) -> Result<Self> {
        let n = dataset.n_samples();
        if n < 2 {
            return Err(Error::InvalidParameter("standardization needs at least 2 samples".into()));
        }
        let m = dataset.input_dim();
        let mut mean = vec![0.0; m];
        let mut scale = vec![1.0; m];
        for j in 0..m {
            let col: Vec<f64> = dataset.inputs().iter().map(|x| x[j]).collect();
            if col.iter().all(|&v| v == col[0]) {
                mean[j] = col[0];
                continue;
            }
            let mu = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
            mean[j] = mu;
            let sd = var.sqrt();
            if sd > 1e-12 * mu.abs().max(1.0) {
                scale[j] = sd;
            }
        }
        Ok(Self { mean, scale })
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, mu), s)| (v - mu) / s).collect()
    }

    pub fn invert_row(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.mean).zip(&self.scale).map(|((v, mu), s)| v * s + mu).collect()
    }

    pub fn apply(&self, dataset: &LabeledDataset) -> Result<LabeledDataset> {
        if dataset.input_dim() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: dataset.input_dim() });
        }
        let inputs = dataset.inputs().iter().map(|x| self.apply_row(x)).collect();
        LabeledDataset::new(inputs, dataset.labels().to_vec())
    }
}

/// Zero mean, unit population variance per column; constant columns are
/// centered and keep scale 1.
pub fn standardize(dataset: &LabeledDataset) -> Result<(LabeledDataset, Standardizer)> {
    let transform = Standardizer::fit(dataset)?;
    Ok((transform.apply(dataset)?, transform))
}

/// Sample indices of a split, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class shuffle and `round(train_fraction * n_class)` train split,
/// then an optional stratified subsample of the train part by largest
/// remainder quotas.
pub fn stratified_split_indices(
    labels: &[i8],
    train_fraction: f64,
    subsample_train: Option<usize>,
    seed: u64,
) -> Result<SplitIndices> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("train_fraction = {train_fraction} outside (0, 1)")));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_by_class = Vec::new();
    let mut test = Vec::new();
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == class).collect();
        idx.shuffle(&mut rng);
        let n_train = ((train_fraction * idx.len() as f64).round() as usize).min(idx.len());
        test.extend_from_slice(&idx[n_train..]);
        idx.truncate(n_train);
        train_by_class.push(idx);
    }
    let train_total: usize = train_by_class.iter().map(Vec::len).sum();
    let mut train: Vec<usize> = match subsample_train {
        None => train_by_class.concat(),
        Some(s) if s > train_total => {
            return Err(Error::SubsampleTooLarge { requested: s, available: train_total })
        }
        Some(s) => {
            let quotas = largest_remainder(s, &train_by_class.iter().map(Vec::len).collect::<Vec<_>>());
            train_by_class
                .iter()
                .zip(quotas)
                .flat_map(|(idx, q)| idx[..q].iter().copied())
                .collect()
        }
    };
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Splits `total` proportionally to `sizes`; leftovers go to the largest
/// fractional parts, earlier entries first on ties.
fn largest_remainder(total: usize, sizes: &[usize]) -> Vec<usize> {
    let sum: usize = sizes.iter().sum();
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| total * s / sum).collect();
    let mut rest = total - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse((total * sizes[i]) % sum));
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
            rest -= 1;
        }
    }
    quotas
}

pub fn stratified_split(
    dataset: &LabeledDataset,
    train_fraction: f64,
    subsample_train: Option<usize>,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let split = stratified_split_indices(dataset.labels(), train_fraction, subsample_train, seed)?;
    Ok((dataset.select(&split.train)?, dataset.select(&split.test)?))
}

/// CSV with header `x_1,...,x_m,y`.
pub fn write_dataset_csv<W: Write>(dataset: &LabeledDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dataset.input_dim()).map(|j| format!("x_{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in dataset.inputs().iter().zip(dataset.labels()) {
        let mut record: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        record.push(y.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(input: R) -> Result<LabeledDataset> {
    let mut r = csv::Reader::from_reader(input);
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad value '{s}': {e}")));
        let values = record.iter().map(parse).collect::<Result<Vec<f64>>>()?;
        let (y, x) = values.split_last().ok_or_else(|| Error::Format("empty record".into()))?;
        if *y != 1.0 && *y != -1.0 {
            return Err(Error::InvalidLabel(*y as i64));
        }
        labels.push(*y as i8);
        inputs.push(x.to_vec());
    }
    LabeledDataset::new(inputs, labels)
}

pub fn save_dataset_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    write_dataset_csv(dataset, BufWriter::new(File::create(path)?))
}

pub fn load_dataset_csv(path: &Path) -> Result<LabeledDataset> {
    read_dataset_csv(BufReader::new(File::open(path)?))
}
