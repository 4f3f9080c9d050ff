//! Axis-aligned threshold classifiers and the exact minimum accuracy scan.
//!
//! For one feature axis the best threshold is found by sorting the column
//! once and sweeping prefix label counts across every gap between distinct
//! consecutive values. Accuracy only changes when the threshold crosses a
//! data value, so the finitely many gaps (plus one sentinel below the
//! minimum) cover every threshold on the real line.
//!
//! All comparisons between candidates are made on integer correct counts.
//! Floating accuracies are derived as `correct_count / N` for reporting.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw labeled inputs: `inputs[k]` is sample `k`, `labels[k]` is `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    inputs: Vec<Vec<f64>>,
    labels: Vec<i8>,
}

impl LabeledDataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if inputs.len() != labels.len() {
            return Err(Error::LengthMismatch { expected: inputs.len(), got: labels.len() });
        }
        validate_labels(&labels)?;
        let m = inputs[0].len();
        for row in &inputs {
            if row.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature);
            }
        }
        Ok(Self { inputs, labels })
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    /// `(positive_count, negative_count)`.
    pub fn class_counts(&self) -> (usize, usize) {
        class_counts(&self.labels)
    }

    /// Keeps the samples at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let inputs = indices.iter().map(|&k| self.inputs[k].clone()).collect();
        let labels = indices.iter().map(|&k| self.labels[k]).collect();
        Self::new(inputs, labels)
    }

    pub fn into_parts(self) -> (Vec<Vec<f64>>, Vec<i8>) {
        (self.inputs, self.labels)
    }
}

pub(crate) fn validate_labels(labels: &[i8]) -> Result<()> {
    match labels.iter().find(|&&y| y != 1 && y != -1) {
        Some(&bad) => Err(Error::InvalidLabel(bad as i64)),
        None => Ok(()),
    }
}

pub(crate) fn class_counts(labels: &[i8]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    (pos, labels.len() - pos)
}

/// Read access to the columns of an embedded dataset.
///
/// Implemented by [`FeatureMatrix`] and by lazy embeddings that compute a
/// column on demand, so estimators touching few axes never need the full
/// `N x d` matrix.
pub trait AxisSource: Sync {
    fn sample_count(&self) -> usize;
    fn axis_count(&self) -> usize;
    /// Values `a_i(x_k)` for every sample `k`, in sample order.
    fn column(&self, axis: usize) -> Cow<'_, [f64]>;
}

/// Dense `N x d` matrix of feature values, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    sample_count: usize,
    axis_count: usize,
    columns: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let d = rows[0].len();
        let mut columns = vec![0.0; n * d];
        for (k, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            for (i, &v) in row.iter().enumerate() {
                columns[i * n + k] = v;
            }
        }
        Self::from_column_major(n, d, columns)
    }

    pub fn from_row_major(sample_count: usize, axis_count: usize, values: &[f64]) -> Result<Self> {
        if values.len() != sample_count * axis_count {
            return Err(Error::LengthMismatch {
                expected: sample_count * axis_count,
                got: values.len(),
            });
        }
        let mut columns = vec![0.0; values.len()];
        for k in 0..sample_count {
            for i in 0..axis_count {
                columns[i * sample_count + k] = values[k * axis_count + i];
            }
        }
        Self::from_column_major(sample_count, axis_count, columns)
    }

    /// Builds from concatenated columns (`columns[i * N + k] = a_i(x_k)`).
    pub fn from_column_major(sample_count: usize, axis_count: usize, columns: Vec<f64>) -> Result<Self> {
        if sample_count == 0 || axis_count == 0 {
            return Err(Error::EmptyDataset);
        }
        if columns.len() != sample_count * axis_count {
            return Err(Error::LengthMismatch {
                expected: sample_count * axis_count,
                got: columns.len(),
            });
        }
        if columns.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
        Ok(Self { sample_count, axis_count, columns })
    }

    pub fn get(&self, sample: usize, axis: usize) -> f64 {
        self.columns[axis * self.sample_count + sample]
    }

    pub fn column_slice(&self, axis: usize) -> &[f64] {
        let n = self.sample_count;
        &self.columns[axis * n..(axis + 1) * n]
    }

    pub fn row(&self, sample: usize) -> Vec<f64> {
        (0..self.axis_count).map(|i| self.get(sample, i)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.sample_count).map(|k| self.row(k)).collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.columns.len());
        for k in 0..self.sample_count {
            out.extend((0..self.axis_count).map(|i| self.get(k, i)));
        }
        out
    }
}

impl AxisSource for FeatureMatrix {
    fn sample_count(&self) -> usize {
        self.sample_count
    }

    fn axis_count(&self) -> usize {
        self.axis_count
    }

    fn column(&self, axis: usize) -> Cow<'_, [f64]> {
        Cow::Borrowed(self.column_slice(axis))
    }
}

/// Which side of the threshold is labeled `+1`.
///
/// Points with `a_i(x) >= tau` are "at or above"; points with `a_i(x) < tau`
/// are "below".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Below is `+1`, at-or-above is `-1` (the flipped stump `-f`).
    BelowIsPlus,
    /// Below is `-1`, at-or-above is `+1` (the stump `sign(a - tau)`).
    BelowIsMinus,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::BelowIsPlus => Orientation::BelowIsMinus,
            Orientation::BelowIsMinus => Orientation::BelowIsPlus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClassifier {
    pub axis_index: usize,
    pub threshold: f64,
    pub orientation: Orientation,
}

impl ThresholdClassifier {
    pub fn predict_value(&self, value: f64) -> i8 {
        let above = value >= self.threshold;
        match (self.orientation, above) {
            (Orientation::BelowIsMinus, true) | (Orientation::BelowIsPlus, false) => 1,
            _ => -1,
        }
    }

    pub fn flipped(&self) -> Self {
        Self { orientation: self.orientation.flipped(), ..*self }
    }
}

/// Best threshold found on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisResult {
    pub axis_index: usize,
    pub best_threshold: f64,
    pub orientation: Orientation,
    pub accuracy: f64,
    pub correct_count: usize,
    pub sample_count: usize,
}

impl AxisResult {
    pub fn classifier(&self) -> ThresholdClassifier {
        ThresholdClassifier {
            axis_index: self.axis_index,
            threshold: self.best_threshold,
            orientation: self.orientation,
        }
    }
}

/// Result of the exhaustive scan over every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinAccuracy {
    pub r_min: f64,
    pub best: AxisResult,
    /// `r_i` for every axis, indexed by axis.
    pub axis_accuracies: Vec<f64>,
}

/// Best single-threshold accuracy on one column of values.
///
/// The returned `axis_index` is 0; callers scanning a matrix overwrite it.
pub fn axis_accuracy(values: &[f64], labels: &[i8]) -> Result<AxisResult> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch { expected: values.len(), got: labels.len() });
    }
    validate_labels(labels)?;
    let (pos, neg) = class_counts(labels);
    scan_axis(0, values, labels, pos, neg)
}

/// Threshold scan for pre-validated labels with known class totals.
pub(crate) fn scan_axis(
    axis_index: usize,
    values: &[f64],
    labels: &[i8],
    pos_total: usize,
    neg_total: usize,
) -> Result<AxisResult> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n != labels.len() {
        return Err(Error::LengthMismatch { expected: n, got: labels.len() });
    }
    let mut sorted: Vec<(f64, i8)> = Vec::with_capacity(n);
    for (&v, &y) in values.iter().zip(labels) {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature);
        }
        sorted.push((v, y));
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best_correct = 0usize;
    let sentinel = below_minimum(sorted[0].0);
    let mut best_threshold = sentinel;
    let mut best_orientation = Orientation::BelowIsMinus;
    let mut consider = |below_pos: usize, below_neg: usize, threshold: f64| {
        let minus = below_neg + (pos_total - below_pos);
        let plus = below_pos + (neg_total - below_neg);
        if minus > best_correct {
            best_correct = minus;
            best_threshold = threshold;
            best_orientation = Orientation::BelowIsMinus;
        }
        if plus > best_correct {
            best_correct = plus;
            best_threshold = threshold;
            best_orientation = Orientation::BelowIsPlus;
        }
    };

    consider(0, 0, sentinel);
    let (mut below_pos, mut below_neg) = (0usize, 0usize);
    for k in 0..n - 1 {
        if sorted[k].1 == 1 {
            below_pos += 1;
        } else {
            below_neg += 1;
        }
        let (lo, hi) = (sorted[k].0, sorted[k + 1].0);
        if lo < hi {
            consider(below_pos, below_neg, split_point(lo, hi));
        }
    }

    Ok(AxisResult {
        axis_index,
        best_threshold,
        orientation: best_orientation,
        accuracy: best_correct as f64 / n as f64,
        correct_count: best_correct,
        sample_count: n,
    })
}

/// A threshold `tau` with `lo < tau <= hi`, the midpoint when representable.
fn split_point(lo: f64, hi: f64) -> f64 {
    let mid = lo * 0.5 + hi * 0.5;
    if lo < mid && mid <= hi {
        mid
    } else {
        hi
    }
}

fn below_minimum(min: f64) -> f64 {
    let step = min - 1.0;
    if step < min {
        return step;
    }
    let step = min - min.abs();
    if step < min {
        step
    } else {
        f64::NEG_INFINITY
    }
}

/// Evaluates one axis of a source against validated labels.
pub(crate) fn evaluate_axis<S: AxisSource + ?Sized>(
    source: &S,
    axis: usize,
    labels: &[i8],
    totals: (usize, usize),
) -> Result<AxisResult> {
    let column = source.column(axis);
    scan_axis(axis, &column, labels, totals.0, totals.1)
}

/// Evaluates the given axes in parallel, returning results in input order.
pub(crate) fn evaluate_axes<S: AxisSource + ?Sized>(
    source: &S,
    axes: &[usize],
    labels: &[i8],
) -> Result<Vec<AxisResult>> {
    check_labels_for(source, labels)?;
    let totals = class_counts(labels);
    axes.par_iter()
        .map(|&axis| {
            if axis >= source.axis_count() {
                return Err(Error::AxisOutOfRange { axis, axis_count: source.axis_count() });
            }
            evaluate_axis(source, axis, labels, totals)
        })
        .collect()
}

pub(crate) fn check_labels_for<S: AxisSource + ?Sized>(source: &S, labels: &[i8]) -> Result<()> {
    if source.sample_count() == 0 || source.axis_count() == 0 {
        return Err(Error::EmptyDataset);
    }
    if labels.len() != source.sample_count() {
        return Err(Error::LengthMismatch { expected: source.sample_count(), got: labels.len() });
    }
    validate_labels(labels)
}

/// Exact `R_min = max_i r_i` over every axis; ties go to the lowest axis.
pub fn r_min_deterministic<S: AxisSource + ?Sized>(source: &S, labels: &[i8]) -> Result<MinAccuracy> {
    let axes: Vec<usize> = (0..source.axis_count()).collect();
    let results = evaluate_axes(source, &axes, labels)?;
    let best = best_of(&results).expect("at least one axis");
    Ok(MinAccuracy {
        r_min: best.accuracy,
        best,
        axis_accuracies: results.iter().map(|r| r.accuracy).collect(),
    })
}

/// Highest correct count; the first occurrence wins ties.
pub(crate) fn best_of(results: &[AxisResult]) -> Option<AxisResult> {
    let mut best: Option<AxisResult> = None;
    for r in results {
        match best {
            Some(b) if r.correct_count <= b.correct_count => {}
            _ => best = Some(*r),
        }
    }
    best
}

/// Number of samples a threshold classifier labels correctly.
pub fn classifier_correct_count<S: AxisSource + ?Sized>(
    classifier: &ThresholdClassifier,
    source: &S,
    labels: &[i8],
) -> Result<usize> {
    check_labels_for(source, labels)?;
    if classifier.axis_index >= source.axis_count() {
        return Err(Error::AxisOutOfRange {
            axis: classifier.axis_index,
            axis_count: source.axis_count(),
        });
    }
    let column = source.column(classifier.axis_index);
    Ok(column
        .iter()
        .zip(labels)
        .filter(|(&v, &y)| classifier.predict_value(v) == y)
        .count())
}

/// Empirical accuracy `(1/N) * #{k : f(x_k) = y_k}`.
pub fn classifier_accuracy<S: AxisSource + ?Sized>(
    classifier: &ThresholdClassifier,
    source: &S,
    labels: &[i8],
) -> Result<f64> {
    let correct = classifier_correct_count(classifier, source, labels)?;
    Ok(correct as f64 / labels.len() as f64)
}

/// A hyperplane classifier `sign(<w, x> + b)`.
///
/// `zero_label` is the prediction when the decision value is exactly zero,
/// which lets a flipped stump keep its "at or above" tie rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub zero_label: i8,
}

impl LinearClassifier {
    pub fn decision_value(&self, features: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (w, x) in self.weights.iter().zip(features) {
            if *w != 0.0 {
                acc += w * x;
            }
        }
        acc + self.bias
    }

    pub fn predict(&self, features: &[f64]) -> i8 {
        let z = self.decision_value(features);
        if z > 0.0 {
            1
        } else if z < 0.0 {
            -1
        } else {
            self.zero_label
        }
    }

    /// Correct count over a feature source, evaluating only non-zero weights.
    pub fn correct_count<S: AxisSource + ?Sized>(&self, source: &S, labels: &[i8]) -> Result<usize> {
        check_labels_for(source, labels)?;
        if self.weights.len() != source.axis_count() {
            return Err(Error::DimensionMismatch {
                expected: source.axis_count(),
                got: self.weights.len(),
            });
        }
        let mut decision = vec![0.0; source.sample_count()];
        for (i, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                let column = source.column(i);
                for (z, x) in decision.iter_mut().zip(column.iter()) {
                    *z += w * x;
                }
            }
        }
        Ok(decision
            .iter()
            .zip(labels)
            .filter(|(&z, &y)| {
                let z = z + self.bias;
                let pred = if z > 0.0 {
                    1
                } else if z < 0.0 {
                    -1
                } else {
                    self.zero_label
                };
                pred == y
            })
            .count())
    }
}

/// Rewrites a stump as a hyperplane with a single non-zero weight.
///
/// `BelowIsMinus` gives `w = e_i, b = -tau`; `BelowIsPlus` gives
/// `w = -e_i, b = tau`.
pub fn as_linear_classifier(classifier: &ThresholdClassifier, axis_count: usize) -> Result<LinearClassifier> {
    if classifier.axis_index >= axis_count {
        return Err(Error::AxisOutOfRange { axis: classifier.axis_index, axis_count });
    }
    let mut weights = vec![0.0; axis_count];
    let (w, bias, zero_label) = match classifier.orientation {
        Orientation::BelowIsMinus => (1.0, -classifier.threshold, 1),
        Orientation::BelowIsPlus => (-1.0, classifier.threshold, -1),
    };
    weights[classifier.axis_index] = w;
    Ok(LinearClassifier { weights, bias, zero_label })
}
