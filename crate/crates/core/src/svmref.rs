//! Soft-margin SVM baselines trained with sequential minimal optimization.
//!
//! The dual problem
//!
//! ```text
//! max  sum_k a_k - 1/2 sum_{k,l} a_k a_l y_k y_l K(x_k, x_l)
//! s.t. 0 <= a_k <= C,  sum_k a_k y_k = 0
//! ```
//!
//! is solved by pairwise updates over a precomputed Gram matrix. Each sweep
//! visits samples in index order; a sample violating its KKT condition by
//! more than `tol` is paired with the partner maximizing `|E_i - E_j|`,
//! falling back to every other index in cyclic order. The solver stops after
//! a sweep with no successful update, or after `max_iter` sweeps.
//!
//! The final bias is the average of `y_k - u_k` over free support vectors,
//! or the midpoint of the feasible interval when none are free.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axiscore::{class_counts, validate_labels, AxisSource};
use crate::error::{Error, Result};

/// Widest input for which linear models store an explicit weight vector.
pub const MAX_EXPLICIT_WEIGHTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `gamma = 1 / (q * Var(X))` over all entries; 1/q when the variance is 0.
pub fn scale_gamma(rows: &[Vec<f64>]) -> f64 {
    let q = rows.first().map_or(1, Vec::len).max(1) as f64;
    let count = rows.iter().map(Vec::len).sum::<usize>() as f64;
    if count == 0.0 {
        return 1.0 / q;
    }
    let mean = rows.iter().flatten().sum::<f64>() / count;
    let var = rows.iter().flatten().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (q * var)
    } else {
        1.0 / q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    /// Maximum number of full sweeps.
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-3, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoDiagnostics {
    pub converged: bool,
    pub sweeps: usize,
    /// Dual objective after each sweep.
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    /// `a_k * y_k` for every training sample.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub support_indices: Vec<usize>,
    /// Training rows at `support_indices`; empty when trained from a Gram
    /// matrix.
    pub support_vectors: Vec<Vec<f64>>,
    /// `w = sum_k a_k y_k x_k` for linear models on narrow inputs.
    pub weights: Option<Vec<f64>>,
    pub input_dim: usize,
    pub training_accuracy: f64,
    pub diagnostics: SmoDiagnostics,
}

impl SvmModel {
    pub fn alphas(&self) -> Vec<f64> {
        self.dual_coefficients.iter().map(|v| v.abs()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_training_labels(n: usize, labels: &[i8]) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: labels.len() });
    }
    validate_labels(labels)?;
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Row-major Gram matrix of `rows` under `kernel`.
pub fn gram_matrix(rows: &[Vec<f64>], kernel: &Kernel) -> Vec<f64> {
    let n = rows.len();
    let mut gram = vec![0.0; n * n];
    gram.par_chunks_mut(n).enumerate().for_each(|(k, out)| {
        for (l, v) in out.iter_mut().enumerate() {
            *v = kernel.eval(&rows[k], &rows[l]);
        }
    });
    gram
}

/// Linear Gram matrix `sum_i a_i(x_k) a_i(x_l)` accumulated column by
/// column, so wide lazy embeddings never need a dense `N x d` matrix.
/// Blocks of axes are reduced in a fixed order, making the result
/// independent of thread scheduling.
pub fn linear_gram_from_axes<S: AxisSource + ?Sized>(source: &S) -> Vec<f64> {
    const BLOCK: usize = 1024;
    let n = source.sample_count();
    let d = source.axis_count();
    let blocks: Vec<Vec<f64>> = (0..d.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; n * n];
            for i in b * BLOCK..((b + 1) * BLOCK).min(d) {
                let col: Cow<'_, [f64]> = source.column(i);
                for k in 0..n {
                    let ck = col[k];
                    if ck != 0.0 {
                        for l in k..n {
                            acc[k * n + l] += ck * col[l];
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut gram = vec![0.0; n * n];
    for block in blocks {
        for (g, v) in gram.iter_mut().zip(block) {
            *g += v;
        }
    }
    for k in 0..n {
        for l in 0..k {
            gram[k * n + l] = gram[l * n + k];
        }
    }
    gram
}

struct Smo<'a> {
    gram: &'a [f64],
    y: Vec<f64>,
    alpha: Vec<f64>,
    /// `E_k = u_k - y_k` with `u_k = sum_l a_l y_l K(l, k)`, bias excluded.
    err: Vec<f64>,
    c: f64,
    n: usize,
}

impl Smo<'_> {
    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    fn objective(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.n {
            let u = self.err[k] + self.y[k];
            total += self.alpha[k] - 0.5 * self.alpha[k] * self.y[k] * u;
        }
        total
    }

    /// Clamps to `[0, C]`, rounding values within `1e-12 C` of a bound onto
    /// it so that bound membership is exact.
    fn snap(&self, a: f64) -> f64 {
        let eps = 1e-12 * self.c;
        if a <= eps {
            0.0
        } else if a >= self.c - eps {
            self.c
        } else {
            a
        }
    }

    /// `a_k` may move so that `y_k a_k` grows.
    fn in_up(&self, k: usize) -> bool {
        if self.y[k] > 0.0 {
            self.alpha[k] < self.c
        } else {
            self.alpha[k] > 0.0
        }
    }

    fn in_low(&self, k: usize) -> bool {
        if self.y[k] > 0.0 {
            self.alpha[k] > 0.0
        } else {
            self.alpha[k] < self.c
        }
    }

    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ei, ej) = (self.err[i], self.err[j]);
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        if hi - lo < 1e-12 {
            return false;
        }
        let eta = self.k(i, i) + self.k(j, j) - 2.0 * self.k(i, j);
        if eta <= 1e-12 {
            return false;
        }
        let new_aj = (aj + yj * (ei - ej) / eta).clamp(lo, hi);
        if (new_aj - aj).abs() < 1e-12 * (new_aj + aj + 1e-12) {
            return false;
        }
        let new_ai = self.snap(ai + yi * yj * (aj - new_aj));
        let new_aj = self.snap(new_aj);
        let (dai, daj) = (new_ai - ai, new_aj - aj);
        for k in 0..self.n {
            self.err[k] += yi * dai * self.k(i, k) + yj * daj * self.k(j, k);
        }
        self.alpha[i] = new_ai;
        self.alpha[j] = new_aj;
        true
    }

    /// Partners `j` forming a pair with `i` whose error gap exceeds `tol`,
    /// largest `|E_i - E_j|` first. Empty when `i` satisfies the KKT
    /// conditions against every other sample.
    fn violating_partners(&self, i: usize, tol: f64) -> Vec<usize> {
        let mut partners: Vec<(usize, f64)> = Vec::new();
        for j in 0..self.n {
            if j == i {
                continue;
            }
            let gap = self.err[j] - self.err[i];
            let violates = (self.in_up(i) && self.in_low(j) && gap > tol) || (self.in_low(i) && self.in_up(j) && -gap > tol);
            if violates {
                partners.push((j, gap.abs()));
            }
        }
        // stable: ties keep index order
        partners.sort_by(|a, b| b.1.total_cmp(&a.1));
        partners.into_iter().map(|(j, _)| j).collect()
    }

    fn final_bias(&self) -> f64 {
        let margin = 1e-9 * self.c;
        let free: Vec<f64> = (0..self.n)
            .filter(|&k| self.alpha[k] > margin && self.alpha[k] < self.c - margin)
            .map(|k| -self.err[k])
            .collect();
        if !free.is_empty() {
            return free.iter().sum::<f64>() / free.len() as f64;
        }
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..self.n {
            let target = -self.err[k];
            let at_upper = self.alpha[k] >= self.c - margin;
            // a = 0 needs y (u + b) >= 1; a = C needs y (u + b) <= 1.
            if (self.y[k] > 0.0) != at_upper {
                lower = lower.max(target);
            } else {
                upper = upper.min(target);
            }
        }
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => 0.0,
        }
    }
}

/// Solves the dual over a row-major Gram matrix. Returns `(alpha, bias,
/// diagnostics)`.
///
/// Each sweep visits samples in index order. A sample that violates the
/// KKT conditions by more than `tol` against some partner is paired with
/// the partner of largest `|E_i - E_j|`; if that step makes no progress the
/// remaining violating partners are tried in turn. Converged means a full
/// sweep found no violating pair.
pub fn smo_solve(gram: &[f64], labels: &[i8], params: &SvmParams) -> Result<(Vec<f64>, f64, SmoDiagnostics)> {
    let n = labels.len();
    check_training_labels(n, labels)?;
    if gram.len() != n * n {
        return Err(Error::LengthMismatch { expected: n * n, got: gram.len() });
    }
    if !(params.c > 0.0 && params.c.is_finite()) || params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::InvalidParameter("C and tol must be positive".into()));
    }
    let y: Vec<f64> = labels.iter().map(|&v| f64::from(v)).collect();
    let mut smo = Smo { gram, err: y.iter().map(|v| -v).collect(), y, alpha: vec![0.0; n], c: params.c, n };
    let mut diagnostics = SmoDiagnostics { converged: false, sweeps: 0, objective_history: Vec::new() };
    while diagnostics.sweeps < params.max_iter {
        let (mut violators, mut changed) = (0, 0);
        for i in 0..n {
            let partners = smo.violating_partners(i, params.tol);
            if partners.is_empty() {
                continue;
            }
            violators += 1;
            if partners.into_iter().any(|j| smo.take_step(i, j)) {
                changed += 1;
            }
        }
        diagnostics.sweeps += 1;
        diagnostics.objective_history.push(smo.objective());
        if violators == 0 {
            diagnostics.converged = true;
            break;
        }
        if changed == 0 {
            break;
        }
    }
    let bias = smo.final_bias();
    Ok((smo.alpha, bias, diagnostics))
}

fn sign_with_zero_plus(z: f64) -> i8 {
    if z >= 0.0 {
        1
    } else {
        -1
    }
}

fn decision_from_gram_row(coefficients: &[f64], row: &[f64], bias: f64) -> f64 {
    coefficients.iter().zip(row).map(|(c, k)| c * k).sum::<f64>() + bias
}

fn assemble(
    gram: &[f64],
    labels: &[i8],
    kernel: Kernel,
    params: &SvmParams,
    rows: Option<&[Vec<f64>]>,
    input_dim: usize,
) -> Result<SvmModel> {
    let (alpha, bias, diagnostics) = smo_solve(gram, labels, params)?;
    let n = labels.len();
    let dual_coefficients: Vec<f64> = alpha.iter().zip(labels).map(|(a, &y)| a * f64::from(y)).collect();
    let support_indices: Vec<usize> = (0..n).filter(|&k| alpha[k] > 0.0).collect();
    let correct = (0..n)
        .filter(|&k| {
            let z = decision_from_gram_row(&dual_coefficients, &gram[k * n..(k + 1) * n], bias);
            sign_with_zero_plus(z) == labels[k]
        })
        .count();
    let support_vectors = rows
        .map(|r| support_indices.iter().map(|&k| r[k].clone()).collect())
        .unwrap_or_default();
    let weights = match (kernel, rows) {
        (Kernel::Linear, Some(r)) if input_dim <= MAX_EXPLICIT_WEIGHTS => {
            let mut w = vec![0.0; input_dim];
            for &k in &support_indices {
                for (wi, xi) in w.iter_mut().zip(&r[k]) {
                    *wi += dual_coefficients[k] * xi;
                }
            }
            Some(w)
        }
        _ => None,
    };
    Ok(SvmModel {
        kernel,
        c: params.c,
        dual_coefficients,
        bias,
        support_indices,
        support_vectors,
        weights,
        input_dim,
        training_accuracy: correct as f64 / n as f64,
        diagnostics,
    })
}

/// Trains on explicit feature rows (`N x q`).
pub fn svm_train(rows: &[Vec<f64>], labels: &[i8], kernel: Kernel, params: &SvmParams) -> Result<SvmModel> {
    check_training_labels(rows.len(), labels)?;
    let q = rows[0].len();
    for r in rows {
        if r.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
    }
    let gram = gram_matrix(rows, &kernel);
    assemble(&gram, labels, kernel, params, Some(rows), q)
}

/// Trains from a precomputed Gram matrix. The model keeps no support
/// vectors; use [`predict_precomputed`] with kernel rows against the
/// training samples.
pub fn svm_train_precomputed(
    gram: &[f64],
    labels: &[i8],
    kernel: Kernel,
    input_dim: usize,
    params: &SvmParams,
) -> Result<SvmModel> {
    assemble(gram, labels, kernel, params, None, input_dim)
}

/// Raw decision values `sum_k a_k y_k K(x_k, x) + b`.
pub fn decision_function(model: &SvmModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    if model.support_vectors.len() != model.support_indices.len() {
        return Err(Error::InvalidParameter(
            "model was trained from a Gram matrix; use predict_precomputed".into(),
        ));
    }
    rows.iter()
        .map(|x| {
            if x.len() != model.input_dim {
                return Err(Error::DimensionMismatch { expected: model.input_dim, got: x.len() });
            }
            let s: f64 = model
                .support_indices
                .iter()
                .zip(&model.support_vectors)
                .map(|(&k, sv)| model.dual_coefficients[k] * model.kernel.eval(sv, x))
                .sum();
            Ok(s + model.bias)
        })
        .collect()
}

/// Signs of the decision function; exact zeros map to `+1`.
pub fn svm_predict(model: &SvmModel, rows: &[Vec<f64>]) -> Result<Vec<i8>> {
    Ok(decision_function(model, rows)?.into_iter().map(sign_with_zero_plus).collect())
}

/// Predictions from kernel rows `K(x_train_k, x)` (one row per query, one
/// column per training sample).
pub fn predict_precomputed(model: &SvmModel, kernel_rows: &[Vec<f64>]) -> Result<Vec<i8>> {
    let n = model.dual_coefficients.len();
    kernel_rows
        .iter()
        .map(|row| {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            Ok(sign_with_zero_plus(decision_from_gram_row(&model.dual_coefficients, row, model.bias)))
        })
        .collect()
}

pub fn accuracy(predictions: &[i8], labels: &[i8]) -> f64 {
    let correct = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    correct as f64 / labels.len() as f64
}
