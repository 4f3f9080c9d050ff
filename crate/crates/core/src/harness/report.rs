//! Experiment reports and their CSV / JSON forms.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::axiscore::AxisResult;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::sampling::PilotStats;

/// Fixed header of the per-row CSV report.
pub const CSV_HEADER: &str = "dataset,method,p,rep,r_hat,axes_evaluated,stop_reason,svm_linear,svm_rbf,wall_ms";

/// One estimator run: a (dataset, method, p) cell at one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub method: String,
    pub p: Option<f64>,
    pub rep: usize,
    pub r_hat: Option<f64>,
    pub axes_evaluated: usize,
    pub stop_reason: Option<String>,
    pub svm_linear: Option<f64>,
    pub svm_rbf: Option<f64>,
    pub wall_ms: f64,
    /// Exhaustive value on the same matrix, when computed.
    pub r_min: Option<f64>,
    pub pilot_stats: Option<PilotStats>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateStat {
    Mean,
    Min,
    Max,
}

impl AggregateStat {
    pub fn as_str(&self) -> &'static str {
        match self {
            AggregateStat::Mean => "mean",
            AggregateStat::Min => "min",
            AggregateStat::Max => "max",
        }
    }
}

/// Mean, min or max of one cell's repetition rows (errors excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub method: String,
    pub p: Option<f64>,
    pub stat: AggregateStat,
    pub r_hat: f64,
    pub axes_evaluated: f64,
    pub wall_ms: f64,
    pub repetitions: usize,
}

/// `(eta, S(eta))` at every distinct axis accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub eta: Vec<f64>,
    pub survival: Vec<f64>,
}

/// Per-dataset ground truth and baselines shared by all of its cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset: String,
    pub n_train: usize,
    pub axis_count: usize,
    pub r_min: Option<f64>,
    pub best_axis: Option<AxisResult>,
    pub deterministic_ms: f64,
    /// Linear SVM on the standardized raw inputs.
    pub svm_linear_raw: Option<f64>,
    /// RBF SVM on the standardized raw inputs.
    pub svm_rbf_raw: Option<f64>,
    /// Linear SVM on the embedded features.
    pub svm_linear_features: Option<f64>,
    pub survival: Option<SurvivalCurve>,
    /// `r_i` for every axis; empty when no exhaustive scan ran.
    pub axis_accuracies: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    /// Pearson correlation of per-dataset `R_min` with the linear baseline.
    pub r_min_vs_svm_linear: Option<f64>,
    pub r_min_vs_svm_rbf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetSummary>,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
    pub correlations: Correlations,
}

impl ExperimentReport {
    /// Copy with every wall-time field zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.rows.iter_mut().for_each(|r| r.wall_ms = 0.0);
        out.aggregates.iter_mut().for_each(|a| a.wall_ms = 0.0);
        out.datasets.iter_mut().for_each(|d| d.deterministic_ms = 0.0);
        out
    }

    /// Rows breaking `r_hat <= 1`, `axes_evaluated <= d` or
    /// `r_hat <= R_min`, described one per line.
    pub fn audit(&self) -> Vec<String> {
        let d = self.config.axis_count();
        let mut problems = Vec::new();
        for row in &self.rows {
            let tag = format!("{}/{}/{:?}/{}", row.dataset, row.method, row.p, row.rep);
            if let Some(r) = row.r_hat {
                if r > 1.0 {
                    problems.push(format!("{tag}: r_hat {r} > 1"));
                }
                if let Some(m) = row.r_min {
                    if r > m {
                        problems.push(format!("{tag}: r_hat {r} > R_min {m}"));
                    }
                }
            }
            if row.axes_evaluated > d {
                problems.push(format!("{tag}: {} axes > d = {d}", row.axes_evaluated));
            }
        }
        problems
    }
}

pub(crate) fn aggregate(rows: &[ReportRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (&rows[start].dataset, &rows[start].method, rows[start].p);
        let mut end = start;
        while end < rows.len() && (&rows[end].dataset, &rows[end].method, rows[end].p) == key {
            end += 1;
        }
        let ok: Vec<&ReportRow> = rows[start..end].iter().filter(|r| r.r_hat.is_some()).collect();
        if !ok.is_empty() {
            let n = ok.len() as f64;
            let r: Vec<f64> = ok.iter().map(|r| r.r_hat.unwrap()).collect();
            let a: Vec<f64> = ok.iter().map(|r| r.axes_evaluated as f64).collect();
            let w: Vec<f64> = ok.iter().map(|r| r.wall_ms).collect();
            let stat = |v: &[f64], s: AggregateStat| match s {
                AggregateStat::Mean => v.iter().sum::<f64>() / n,
                AggregateStat::Min => v.iter().cloned().fold(f64::INFINITY, f64::min),
                AggregateStat::Max => v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            };
            for s in [AggregateStat::Mean, AggregateStat::Min, AggregateStat::Max] {
                out.push(AggregateRow {
                    dataset: key.0.clone(),
                    method: key.1.clone(),
                    p: key.2,
                    stat: s,
                    r_hat: stat(&r, s),
                    axes_evaluated: stat(&a, s),
                    wall_ms: stat(&w, s),
                    repetitions: ok.len(),
                });
            }
        }
        start = end;
    }
    out
}

/// Sample Pearson correlation; `None` with fewer than two points or zero
/// variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

fn fmt6(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Per-row and aggregate CSV. With `timing == false` the wall-time column
/// is left empty so repeated runs compare byte for byte.
pub fn write_report_csv<W: Write>(report: &ExperimentReport, timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    let wall = |ms: f64| if timing { format!("{ms:.6}") } else { String::new() };
    for r in &report.rows {
        let stop = match (&r.error, &r.stop_reason) {
            (Some(_), _) => "error".to_string(),
            (None, Some(s)) => s.clone(),
            (None, None) => String::new(),
        };
        w.write_record([
            r.dataset.clone(),
            r.method.clone(),
            fmt6(r.p),
            r.rep.to_string(),
            fmt6(r.r_hat),
            r.axes_evaluated.to_string(),
            stop,
            fmt6(r.svm_linear),
            fmt6(r.svm_rbf),
            wall(r.wall_ms),
        ])?;
    }
    let baseline = |dataset: &str| report.rows.iter().find(|r| r.dataset == dataset);
    for a in &report.aggregates {
        let base = baseline(&a.dataset);
        w.write_record([
            a.dataset.clone(),
            a.method.clone(),
            fmt6(a.p),
            a.stat.as_str().to_string(),
            fmt6(Some(a.r_hat)),
            format!("{:.6}", a.axes_evaluated),
            String::new(),
            fmt6(base.and_then(|r| r.svm_linear)),
            fmt6(base.and_then(|r| r.svm_rbf)),
            wall(a.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_survival_csv<W: Write>(curve: &SurvivalCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "survival"])?;
    for (e, s) in curve.eta.iter().zip(&curve.survival) {
        w.write_record([format!("{e:.6}"), format!("{s:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_axis_accuracies_csv<W: Write>(accuracies: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["axis", "accuracy"])?;
    for (i, a) in accuracies.iter().enumerate() {
        w.write_record([i.to_string(), format!("{a:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_from_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

/// Writes the report into `dir`, returning the files written.
///
/// CSV: `report.csv`, plus `survival_<dataset>.csv` and
/// `axis_accuracies_<dataset>.csv` for datasets with an exhaustive scan.
/// JSON: `report.json`.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Json => {
            let path = dir.join("report.json");
            fs::write(&path, report_to_json(report)?)?;
            written.push(path);
        }
        ReportFormat::Csv => {
            let path = dir.join("report.csv");
            write_report_csv(report, true, BufWriter::new(File::create(&path)?))?;
            written.push(path);
            for summary in &report.datasets {
                if let Some(curve) = &summary.survival {
                    let path = dir.join(format!("survival_{}.csv", summary.dataset));
                    write_survival_csv(curve, BufWriter::new(File::create(&path)?))?;
                    written.push(path);
                }
                if !summary.axis_accuracies.is_empty() {
                    let path = dir.join(format!("axis_accuracies_{}.csv", summary.dataset));
                    write_axis_accuracies_csv(&summary.axis_accuracies, BufWriter::new(File::create(&path)?))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 2.0]), None);
    }

    fn row(method: &str, rep: usize, r_hat: f64, axes: usize) -> ReportRow {
        ReportRow {
            dataset: "circles".into(),
            method: method.into(),
            p: Some(0.25),
            rep,
            r_hat: Some(r_hat),
            axes_evaluated: axes,
            stop_reason: Some("fixed_size_reached".into()),
            svm_linear: Some(0.5),
            svm_rbf: Some(1.0),
            wall_ms: rep as f64,
            r_min: Some(0.7),
            pilot_stats: None,
            error: None,
        }
    }

    #[test]
    fn aggregates_by_cell() {
        let rows = vec![row("conservative", 0, 0.6, 12), row("conservative", 1, 0.7, 12), row("pilot", 0, 0.65, 100)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 6);
        assert!((agg[0].r_hat - 0.65).abs() < 1e-12);
        assert_eq!(agg[1].r_hat, 0.6);
        assert_eq!(agg[2].r_hat, 0.7);
        assert_eq!(agg[3].method, "pilot");
    }
}
