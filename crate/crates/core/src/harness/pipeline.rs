//! Experiment pipeline: data, split, standardization, embedding, estimator
//! cells and SVM baselines.

use std::time::Instant;

use rayon::prelude::*;

use crate::axiscore::{r_min_deterministic, AxisResult, AxisSource, FeatureMatrix, LabeledDataset, MinAccuracy};
use crate::datagen::{generate, standardize, stratified_split_indices, DatasetKind, DatasetSpec};
use crate::error::{Error, Result};
use crate::featmap::pauli::MAX_FEATURE_QUBITS;
use crate::featmap::{pauli_feature_matrix, ProjectionSpec, ProxyEmbedding};
use crate::harness::config::{sub_seed, EmbeddingKind, ExperimentConfig};
use crate::harness::report::{
    aggregate, pearson, Correlations, DatasetSummary, ExperimentReport, ReportRow, SurvivalCurve,
};
use crate::sampling::{
    adaptive_estimate, conservative_estimate, deterministic_estimate, pilot_estimate, survival_function,
    AdaptiveParams, EstimateResult, Method, PilotParams,
};
use crate::svmref::{linear_gram_from_axes, scale_gamma, svm_train, svm_train_precomputed, Kernel, SvmParams};

/// Method label of the per-dataset baseline row.
pub const BASELINE_METHOD: &str = "svm_baseline";

/// Estimator settings shared by the CLI and the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSettings {
    /// Prior for the conservative estimator.
    pub p: f64,
    pub delta: f64,
    pub pilot: PilotParams,
    pub adaptive: AdaptiveParams,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self { p: 0.25, delta: 0.05, pilot: PilotParams::default(), adaptive: AdaptiveParams::default() }
    }
}

/// Runs one estimator by method name.
pub fn run_estimator<S: AxisSource + ?Sized>(
    source: &S,
    labels: &[i8],
    method: Method,
    settings: &EstimatorSettings,
    seed: u64,
) -> Result<EstimateResult> {
    match method {
        Method::Deterministic => deterministic_estimate(source, labels),
        Method::Conservative => conservative_estimate(source, labels, settings.p, settings.delta, seed),
        Method::Pilot => pilot_estimate(source, labels, &settings.pilot, seed),
        Method::Adaptive => adaptive_estimate(source, labels, &settings.adaptive, seed),
    }
}

enum Embedded {
    Proxy(ProxyEmbedding),
    Dense(FeatureMatrix),
}

impl Embedded {
    fn source(&self) -> &dyn AxisSource {
        match self {
            Embedded::Proxy(p) => p,
            Embedded::Dense(m) => m,
        }
    }
}

/// Standardized training subsample of one dataset.
pub fn prepare_training_set(config: &ExperimentConfig, kind: DatasetKind) -> Result<LabeledDataset> {
    let name = kind.as_str();
    let spec = DatasetSpec::new(kind, config.n_samples, sub_seed(config.seed, &[name, "data"]));
    let full = generate(&spec)?;
    let split = stratified_split_indices(
        full.labels(),
        config.train_fraction,
        Some(config.n_train),
        sub_seed(config.seed, &[name, "split"]),
    )?;
    let (train, _) = standardize(&full.select(&split.train)?)?;
    Ok(train)
}

fn embed(config: &ExperimentConfig, kind: DatasetKind, train: &LabeledDataset) -> Result<Embedded> {
    match config.embedding {
        EmbeddingKind::Proxy => {
            let spec = ProjectionSpec {
                input_dim: train.input_dim(),
                feature_dim: config.axis_count(),
                seed: sub_seed(config.seed, &[kind.as_str(), "embed"]),
            };
            Ok(Embedded::Proxy(ProxyEmbedding::new(train, spec)?))
        }
        EmbeddingKind::Pauli => {
            if config.qubits > MAX_FEATURE_QUBITS {
                return Err(Error::DenseSimulationLimit { qubits: config.qubits, limit: MAX_FEATURE_QUBITS });
            }
            Ok(Embedded::Dense(pauli_feature_matrix(train, &config.circuit())?))
        }
    }
}

struct Baselines {
    linear_raw: Option<f64>,
    rbf_raw: Option<f64>,
    linear_features: Option<f64>,
}

fn baselines(config: &ExperimentConfig, train: &LabeledDataset, source: &dyn AxisSource) -> Baselines {
    let params: SvmParams = config.svm_params();
    let rows = train.inputs();
    let labels = train.labels();
    let linear_raw = svm_train(rows, labels, Kernel::Linear, &params).ok().map(|m| m.training_accuracy);
    let rbf = Kernel::Rbf { gamma: scale_gamma(rows) };
    let rbf_raw = svm_train(rows, labels, rbf, &params).ok().map(|m| m.training_accuracy);
    let linear_features = if config.svm_on_features {
        let gram = linear_gram_from_axes(source);
        svm_train_precomputed(&gram, labels, Kernel::Linear, source.axis_count(), &params)
            .ok()
            .map(|m| m.training_accuracy)
    } else {
        None
    };
    Baselines { linear_raw, rbf_raw, linear_features }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    p: Option<f64>,
    rep: usize,
}

fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &method in &config.methods {
        match method {
            // seed-free, so a single row
            Method::Deterministic => out.push(Cell { method, p: None, rep: 0 }),
            Method::Conservative => {
                for &p in &config.p_values {
                    out.extend((0..config.repetitions).map(|rep| Cell { method, p: Some(p), rep }));
                }
            }
            Method::Pilot | Method::Adaptive => {
                out.extend((0..config.repetitions).map(|rep| Cell { method, p: None, rep }))
            }
        }
    }
    out
}

fn cell_seed(config: &ExperimentConfig, dataset: &str, cell: &Cell) -> u64 {
    let p = cell.p.map(|p| p.to_string()).unwrap_or_default();
    sub_seed(config.seed, &[dataset, cell.method.as_str(), &p, &cell.rep.to_string()])
}

fn error_row(dataset: &str, method: &str, p: Option<f64>, rep: usize, err: &dyn std::fmt::Display) -> ReportRow {
    ReportRow {
        dataset: dataset.to_string(),
        method: method.to_string(),
        p,
        rep,
        r_hat: None,
        axes_evaluated: 0,
        stop_reason: None,
        svm_linear: None,
        svm_rbf: None,
        wall_ms: 0.0,
        r_min: None,
        pilot_stats: None,
        error: Some(err.to_string()),
    }
}

fn run_dataset(config: &ExperimentConfig, kind: DatasetKind) -> (DatasetSummary, Vec<ReportRow>) {
    let name = kind.as_str();
    let mut summary = DatasetSummary {
        dataset: name.to_string(),
        n_train: config.n_train,
        axis_count: config.axis_count(),
        r_min: None,
        best_axis: None,
        deterministic_ms: 0.0,
        svm_linear_raw: None,
        svm_rbf_raw: None,
        svm_linear_features: None,
        survival: None,
        axis_accuracies: Vec::new(),
        error: None,
    };
    let prepared = prepare_training_set(config, kind).and_then(|t| embed(config, kind, &t).map(|e| (t, e)));
    let (train, embedded) = match prepared {
        Ok(v) => v,
        Err(e) => {
            summary.error = Some(e.to_string());
            let mut rows = vec![error_row(name, BASELINE_METHOD, None, 0, &e)];
            rows.extend(cells(config).iter().map(|c| error_row(name, c.method.as_str(), c.p, c.rep, &e)));
            return (summary, rows);
        }
    };
    let source = embedded.source();
    let labels = train.labels();

    // exhaustive ground truth, reused by every cell for the audit
    let start = Instant::now();
    let truth: Result<MinAccuracy> = r_min_deterministic(source, labels);
    summary.deterministic_ms = start.elapsed().as_secs_f64() * 1e3;
    match &truth {
        Ok(t) => {
            summary.r_min = Some(t.r_min);
            summary.best_axis = Some(t.best);
            if let Ok(sf) = survival_function(&t.axis_accuracies) {
                summary.survival = Some(SurvivalCurve { eta: sf.thresholds.clone(), survival: sf.values.clone() });
            }
            summary.axis_accuracies = t.axis_accuracies.clone();
        }
        Err(e) => summary.error = Some(e.to_string()),
    }
    let r_min = summary.r_min;

    let base = baselines(config, &train, source);
    summary.svm_linear_raw = base.linear_raw;
    summary.svm_rbf_raw = base.rbf_raw;
    summary.svm_linear_features = base.linear_features;

    let mut rows = vec![ReportRow {
        dataset: name.to_string(),
        method: BASELINE_METHOD.to_string(),
        p: None,
        rep: 0,
        r_hat: None,
        axes_evaluated: 0,
        stop_reason: None,
        svm_linear: base.linear_raw,
        svm_rbf: base.rbf_raw,
        wall_ms: 0.0,
        r_min,
        pilot_stats: None,
        error: None,
    }];

    let settings = |p: Option<f64>| EstimatorSettings {
        p: p.unwrap_or(0.25),
        delta: config.delta,
        pilot: config.pilot_params(),
        adaptive: config.adaptive_params(),
    };
    let cell_rows: Vec<ReportRow> = cells(config)
        .par_iter()
        .map(|cell| {
            let (result, wall_ms) = if cell.method == Method::Deterministic {
                let cached = truth.as_ref().map(deterministic_result).map_err(|e| e.to_string());
                (cached, summary.deterministic_ms)
            } else {
                let start = Instant::now();
                let r = run_estimator(source, labels, cell.method, &settings(cell.p), cell_seed(config, name, cell))
                    .map_err(|e| e.to_string());
                (r, start.elapsed().as_secs_f64() * 1e3)
            };
            match result {
                Ok(est) => ReportRow {
                    dataset: name.to_string(),
                    method: cell.method.as_str().to_string(),
                    p: cell.p,
                    rep: cell.rep,
                    r_hat: Some(est.r_hat),
                    axes_evaluated: est.axes_evaluated,
                    stop_reason: Some(est.stopping_reason.as_str().to_string()),
                    svm_linear: base.linear_raw,
                    svm_rbf: base.rbf_raw,
                    wall_ms,
                    r_min,
                    pilot_stats: est.pilot_stats,
                    error: None,
                },
                Err(e) => error_row(name, cell.method.as_str(), cell.p, cell.rep, &e),
            }
        })
        .collect();
    rows.extend(cell_rows);
    (summary, rows)
}

/// Deterministic estimate rebuilt from the cached scan without storing
/// every per-axis result.
fn deterministic_result(truth: &MinAccuracy) -> EstimateResult {
    let best: AxisResult = truth.best;
    EstimateResult {
        r_hat: truth.r_min,
        sampled_axes: vec![best.axis_index],
        axis_results: vec![best],
        method: Method::Deterministic,
        stopping_reason: crate::sampling::StoppingReason::Exhausted,
        axes_evaluated: truth.axis_accuracies.len(),
        pilot_stats: None,
    }
}

/// Runs every dataset and cell of `config`. Stage errors are recorded in
/// the affected rows and do not stop other cells.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut datasets = Vec::new();
    let mut rows = Vec::new();
    for &kind in &config.datasets {
        let (summary, dataset_rows) = run_dataset(config, kind);
        datasets.push(summary);
        rows.extend(dataset_rows);
    }
    let aggregates = aggregate(&rows);
    let paired = |f: fn(&DatasetSummary) -> Option<f64>| -> (Vec<f64>, Vec<f64>) {
        datasets.iter().filter_map(|d| Some((d.r_min?, f(d)?))).unzip()
    };
    let (x, y) = paired(|d| d.svm_linear_raw);
    let r_min_vs_svm_linear = pearson(&x, &y);
    let (x, y) = paired(|d| d.svm_rbf_raw);
    let r_min_vs_svm_rbf = pearson(&x, &y);
    Ok(ExperimentReport {
        config: config.clone(),
        datasets,
        rows,
        aggregates,
        correlations: Correlations { r_min_vs_svm_linear, r_min_vs_svm_rbf },
    })
}
