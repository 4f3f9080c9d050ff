//! Random-projection proxy embedding `Phi(x) = tanh(W^T x)`.
//!
//! `W` has `m` rows and `d` columns with i.i.d. `N(0, 1/sqrt(m))` entries
//! (standard deviation `1/sqrt(m)`). Column `i` is drawn from its own
//! ChaCha stream, selected by `i`, under the spec seed. A column therefore
//! depends only on `(m, seed, i)`: growing `d` extends the matrix without
//! reshuffling earlier columns, and a single axis can be recomputed on
//! demand bit-for-bit.

use std::borrow::Cow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axiscore::{AxisSource, FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub input_dim: usize,
    pub feature_dim: usize,
    pub seed: u64,
}

impl ProjectionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.feature_dim == 0 {
            return Err(Error::InvalidParameter("projection dimensions must be positive".into()));
        }
        Ok(())
    }

    /// Column `axis` of `W`.
    pub fn weights(&self, axis: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(axis as u64);
        let normal = Normal::new(0.0, 1.0 / (self.input_dim as f64).sqrt()).expect("positive std");
        (0..self.input_dim).map(|_| normal.sample(&mut rng)).collect()
    }

    /// Feature `axis` for every input row.
    pub fn feature_column(&self, axis: usize, inputs: &[Vec<f64>]) -> Vec<f64> {
        let w = self.weights(axis);
        inputs
            .iter()
            .map(|x| {
                let dot: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
                dot.tanh()
            })
            .collect()
    }
}

/// Lazy proxy embedding: columns are computed when requested.
#[derive(Debug, Clone)]
pub struct ProxyEmbedding {
    spec: ProjectionSpec,
    inputs: Vec<Vec<f64>>,
}

impl ProxyEmbedding {
    pub fn new(dataset: &LabeledDataset, spec: ProjectionSpec) -> Result<Self> {
        spec.validate()?;
        if dataset.input_dim() != spec.input_dim {
            return Err(Error::DimensionMismatch { expected: spec.input_dim, got: dataset.input_dim() });
        }
        Ok(Self { spec, inputs: dataset.inputs().to_vec() })
    }

    pub fn spec(&self) -> &ProjectionSpec {
        &self.spec
    }

    /// Evaluates every column into a dense matrix.
    pub fn materialize(&self) -> Result<FeatureMatrix> {
        let n = self.inputs.len();
        let d = self.spec.feature_dim;
        let columns: Vec<f64> = (0..d)
            .into_par_iter()
            .flat_map_iter(|i| self.spec.feature_column(i, &self.inputs))
            .collect();
        FeatureMatrix::from_column_major(n, d, columns)
    }
}

impl AxisSource for ProxyEmbedding {
    fn sample_count(&self) -> usize {
        self.inputs.len()
    }

    fn axis_count(&self) -> usize {
        self.spec.feature_dim
    }

    fn column(&self, axis: usize) -> Cow<'_, [f64]> {
        Cow::Owned(self.spec.feature_column(axis, &self.inputs))
    }
}

/// Eager `tanh(W^T x_k)` for every sample.
pub fn proxy_embed(dataset: &LabeledDataset, spec: &ProjectionSpec) -> Result<FeatureMatrix> {
    ProxyEmbedding::new(dataset, *spec)?.materialize()
}
