//! Experiment configuration, pipeline and reports.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{sub_seed, EmbeddingKind, ExperimentConfig};
pub use pipeline::{prepare_training_set, run_estimator, run_experiment, EstimatorSettings, BASELINE_METHOD};
pub use report::{
    emit_report, pearson, report_from_json, report_to_json, write_report_csv, AggregateRow, AggregateStat,
    Correlations, DatasetSummary, ExperimentReport, ReportFormat, ReportRow, SurvivalCurve, CSV_HEADER,
};
