//! Monte Carlo estimation of the minimum accuracy by axis subsampling.
//!
//! Every estimator returns the maximum axis accuracy over a uniformly drawn
//! subset of axes, so its value can never exceed the exhaustive `R_min`. The
//! estimators differ only in how many axes they draw:
//!
//! - conservative: fixed `t = ceil(ln(1/delta) / p)` from a prior `p`;
//! - pilot: estimates `p` from a pilot sample at its 75th percentile;
//! - adaptive: draws batches until the running best stops moving.
//!
//! Axis indices are always drawn sequentially from one seeded generator, so
//! results depend only on the inputs and the seed.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::axiscore::{best_of, check_labels_for, evaluate_axes, AxisResult, AxisSource};
use crate::error::{Error, Result};

/// Inputs to the quantile coverage formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageQuery {
    /// Total number of axes.
    pub d: usize,
    /// Fraction of axes with accuracy at least `eta`.
    pub p: f64,
    /// Sample size.
    pub t: usize,
    pub eta: f64,
    pub delta: f64,
}

impl CoverageQuery {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        if self.t > self.d {
            return Err(Error::SampleExceedsPopulation { t: self.t, d: self.d });
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }

    /// `k = floor(p * d)`.
    pub fn good_axes(&self) -> usize {
        good_axis_count(self.p, self.d)
    }
}

/// `floor(p * d)`, snapping products that land within rounding error of an
/// integer (so `0.29 * 100` counts 29 axes, not 28).
pub fn good_axis_count(p: f64, d: usize) -> usize {
    let x = p * d as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) { nearest } else { x.floor() };
    (k.max(0.0) as usize).min(d)
}

/// Probability that a uniform sample of `t` out of `d` axes, drawn without
/// replacement, contains at least one of the `floor(p d)` good axes.
pub fn coverage_probability_exact(q: &CoverageQuery) -> Result<f64> {
    q.validate()?;
    let (d, t, k) = (q.d, q.t, q.good_axes());
    if t == 0 || k == 0 {
        return Ok(0.0);
    }
    if t > d - k {
        return Ok(1.0);
    }
    // C(d-k, t) / C(d, t) as a product of t factors in (0, 1].
    let miss = (0..t).fold(1.0, |acc, j| acc * (d - k - j) as f64 / (d - j) as f64);
    Ok(1.0 - miss)
}

/// With-replacement lower bound `1 - (1 - p)^t`.
pub fn coverage_probability_bound(q: &CoverageQuery) -> f64 {
    1.0 - (1.0 - q.p).powi(q.t as i32)
}

/// Smallest integer `t >= ln(1/delta) / p`.
pub fn sample_size(p: f64, delta: f64) -> Result<usize> {
    if p == 0.0 {
        return Err(Error::PriorExcludesGoodAxes);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(((1.0 / delta).ln() / p).ceil() as usize)
}

/// Empirical tail `S(eta) = #{i : r_i >= eta} / d` of axis accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalFunction {
    /// Distinct accuracy values, ascending.
    pub thresholds: Vec<f64>,
    /// `S` evaluated at each threshold.
    pub values: Vec<f64>,
    /// All accuracies, sorted ascending.
    pub source_accuracies: Vec<f64>,
}

impl SurvivalFunction {
    pub fn eval(&self, eta: f64) -> f64 {
        let d = self.source_accuracies.len();
        let below = self.source_accuracies.partition_point(|&r| r < eta);
        (d - below) as f64 / d as f64
    }

    pub fn axis_count(&self) -> usize {
        self.source_accuracies.len()
    }
}

pub fn survival_function(accuracies: &[f64]) -> Result<SurvivalFunction> {
    if accuracies.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if accuracies.iter().any(|r| r.is_nan()) {
        return Err(Error::NonFiniteFeature);
    }
    let mut sorted = accuracies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut thresholds = sorted.clone();
    thresholds.dedup();
    let mut sf = SurvivalFunction { thresholds, values: Vec::new(), source_accuracies: sorted };
    sf.values = sf.thresholds.iter().map(|&eta| sf.eval(eta)).collect();
    Ok(sf)
}

/// Incremental uniform sampling without replacement from `0..d`.
///
/// A partial Fisher-Yates shuffle whose displaced entries live in a sparse
/// map, so memory grows with the number of draws rather than with `d`.
/// Successive calls to [`AxisSampler::draw`] never repeat an index.
#[derive(Debug, Clone)]
pub struct AxisSampler {
    d: usize,
    drawn: usize,
    displaced: HashMap<usize, usize>,
    rng: ChaCha8Rng,
}

impl AxisSampler {
    pub fn new(d: usize, seed: u64) -> Self {
        Self { d, drawn: 0, displaced: HashMap::new(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn remaining(&self) -> usize {
        self.d - self.drawn
    }

    pub fn draw(&mut self, count: usize) -> Result<Vec<usize>> {
        if count > self.remaining() {
            return Err(Error::SampleExceedsPopulation { t: self.drawn + count, d: self.d });
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let j = self.drawn;
            let r = self.rng.random_range(j..self.d);
            let at_r = *self.displaced.get(&r).unwrap_or(&r);
            let at_j = *self.displaced.get(&j).unwrap_or(&j);
            self.displaced.insert(r, at_j);
            self.displaced.remove(&j);
            out.push(at_r);
            self.drawn += 1;
        }
        Ok(out)
    }
}

/// `t` distinct indices from `0..d`, uniform over `t`-subsets, in draw order.
pub fn sample_axes(d: usize, t: usize, seed: u64) -> Result<Vec<usize>> {
    if t > d {
        return Err(Error::SampleExceedsPopulation { t, d });
    }
    AxisSampler::new(d, seed).draw(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[serde(alias = "det")]
    Deterministic,
    Conservative,
    Pilot,
    Adaptive,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Deterministic => "det",
            Method::Conservative => "conservative",
            Method::Pilot => "pilot",
            Method::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" | "deterministic" => Ok(Method::Deterministic),
            "conservative" => Ok(Method::Conservative),
            "pilot" => Ok(Method::Pilot),
            "adaptive" => Ok(Method::Adaptive),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingReason {
    FixedSizeReached,
    Converged,
    Stable,
    BudgetExhausted,
    Exhausted,
}

impl StoppingReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StoppingReason::FixedSizeReached => "fixed_size_reached",
            StoppingReason::Converged => "converged",
            StoppingReason::Stable => "stable",
            StoppingReason::BudgetExhausted => "budget_exhausted",
            StoppingReason::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for StoppingReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotStats {
    pub eta_pilot: f64,
    pub p_hat: f64,
    pub t_required: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub r_hat: f64,
    pub sampled_axes: Vec<usize>,
    pub axis_results: Vec<AxisResult>,
    pub method: Method,
    pub stopping_reason: StoppingReason,
    pub axes_evaluated: usize,
    pub pilot_stats: Option<PilotStats>,
}

impl EstimateResult {
    fn from_results(
        method: Method,
        axis_results: Vec<AxisResult>,
        stopping_reason: StoppingReason,
        pilot_stats: Option<PilotStats>,
    ) -> Self {
        let best = best_of(&axis_results).expect("at least one evaluated axis");
        Self {
            r_hat: best.accuracy,
            sampled_axes: axis_results.iter().map(|r| r.axis_index).collect(),
            axes_evaluated: axis_results.len(),
            axis_results,
            method,
            stopping_reason,
            pilot_stats,
        }
    }

    /// The best evaluated axis (first on ties).
    pub fn best(&self) -> AxisResult {
        best_of(&self.axis_results).expect("at least one evaluated axis")
    }
}

fn check_fraction(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {value} outside (0, 1]")))
    }
}

fn ceil_fraction(fraction: f64, d: usize) -> usize {
    ((fraction * d as f64).ceil() as usize).clamp(1, d)
}

/// Exhaustive scan packaged as an estimate over all axes.
pub fn deterministic_estimate<S: AxisSource + ?Sized>(source: &S, labels: &[i8]) -> Result<EstimateResult> {
    let axes: Vec<usize> = (0..source.axis_count()).collect();
    let results = evaluate_axes(source, &axes, labels)?;
    Ok(EstimateResult::from_results(Method::Deterministic, results, StoppingReason::Exhausted, None))
}

/// Fixed-size estimate with `t = min(ceil(ln(1/delta)/p), d)` axes.
pub fn conservative_estimate<S: AxisSource + ?Sized>(
    source: &S,
    labels: &[i8],
    p_conservative: f64,
    delta: f64,
    seed: u64,
) -> Result<EstimateResult> {
    check_labels_for(source, labels)?;
    let d = source.axis_count();
    let t = sample_size(p_conservative, delta)?.min(d);
    let axes = sample_axes(d, t, seed)?;
    let results = evaluate_axes(source, &axes, labels)?;
    Ok(EstimateResult::from_results(Method::Conservative, results, StoppingReason::FixedSizeReached, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotParams {
    pub n_pilot: usize,
    pub delta: f64,
    /// Caps the total at `ceil(cap_fraction * d)` axes.
    pub cap_fraction: f64,
}

impl Default for PilotParams {
    fn default() -> Self {
        Self { n_pilot: 100, delta: 0.05, cap_fraction: 0.01 }
    }
}

/// Nearest-rank percentile of an ascending slice: the value at 1-based
/// rank `ceil(q * n)`.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Two-stage estimate: a pilot sample sets `eta` to its 75th percentile and
/// `p_hat` to the pilot fraction at or above it, then the sample is topped
/// up to `ceil(ln(1/delta)/p_hat)` axes, capped at `ceil(cap_fraction d)`.
pub fn pilot_estimate<S: AxisSource + ?Sized>(
    source: &S,
    labels: &[i8],
    params: &PilotParams,
    seed: u64,
) -> Result<EstimateResult> {
    check_labels_for(source, labels)?;
    let d = source.axis_count();
    if params.n_pilot == 0 {
        return Err(Error::InvalidParameter("n_pilot must be at least 1".into()));
    }
    if params.n_pilot > d {
        return Err(Error::SampleExceedsPopulation { t: params.n_pilot, d });
    }
    check_fraction("cap_fraction", params.cap_fraction)?;

    let mut sampler = AxisSampler::new(d, seed);
    let pilot_axes = sampler.draw(params.n_pilot)?;
    let mut results = evaluate_axes(source, &pilot_axes, labels)?;

    let mut sorted: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    sorted.sort_by(f64::total_cmp);
    let eta = nearest_rank(&sorted, 0.75);
    let above = sorted.iter().filter(|&&r| r >= eta).count();
    let p_hat = above as f64 / params.n_pilot as f64;
    let t_required = sample_size(p_hat, params.delta)?;

    let budget = t_required.min(ceil_fraction(params.cap_fraction, d)).min(d);
    if budget > params.n_pilot {
        let extra = sampler.draw(budget - params.n_pilot)?;
        results.extend(evaluate_axes(source, &extra, labels)?);
    }

    let reason = if results.len() == d {
        StoppingReason::Exhausted
    } else if t_required > results.len() {
        StoppingReason::BudgetExhausted
    } else {
        StoppingReason::FixedSizeReached
    };
    let stats = PilotStats { eta_pilot: eta, p_hat, t_required };
    Ok(EstimateResult::from_results(Method::Pilot, results, reason, Some(stats)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveParams {
    pub batch_size: usize,
    /// Consecutive non-improving batches before stopping.
    pub patience: usize,
    pub stability_eps: f64,
    /// Number of recent batch-end best values checked for stability.
    pub stability_window: usize,
    /// Caps the total at `ceil(budget_fraction * d)` axes.
    pub budget_fraction: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self { batch_size: 40, patience: 3, stability_eps: 1e-3, stability_window: 5, budget_fraction: 0.01 }
    }
}

/// Batch-incremental estimate.
///
/// After each batch the stopping rules are checked in order: no axes left
/// (`Exhausted`), budget reached (`BudgetExhausted`), `patience` batches
/// without strict improvement (`Converged`), then the spread of the last
/// `stability_window` batch-end best values at most `stability_eps`
/// (`Stable`). The last batch is truncated so the budget is never exceeded.
pub fn adaptive_estimate<S: AxisSource + ?Sized>(
    source: &S,
    labels: &[i8],
    params: &AdaptiveParams,
    seed: u64,
) -> Result<EstimateResult> {
    check_labels_for(source, labels)?;
    if params.batch_size == 0 || params.patience == 0 || params.stability_window == 0 {
        return Err(Error::InvalidParameter(
            "batch_size, patience and stability_window must be at least 1".into(),
        ));
    }
    if params.stability_eps.is_nan() || params.stability_eps < 0.0 {
        return Err(Error::InvalidParameter("stability_eps must be non-negative".into()));
    }
    check_fraction("budget_fraction", params.budget_fraction)?;

    let d = source.axis_count();
    let budget = ceil_fraction(params.budget_fraction, d);
    let mut sampler = AxisSampler::new(d, seed);
    let mut results: Vec<AxisResult> = Vec::new();
    let mut best: Option<usize> = None;
    let mut history: Vec<f64> = Vec::new();
    let mut stale = 0usize;

    let reason = loop {
        let take = params.batch_size.min(sampler.remaining()).min(budget - results.len());
        let axes = sampler.draw(take)?;
        let batch = evaluate_axes(source, &axes, labels)?;
        let batch_best = batch.iter().map(|r| r.correct_count).max();
        results.extend(batch);

        match (best, batch_best) {
            (None, Some(b)) => {
                best = Some(b);
                stale = 0;
            }
            (Some(cur), Some(b)) if b > cur => {
                best = Some(b);
                stale = 0;
            }
            _ => stale += 1,
        }
        let n = labels.len() as f64;
        history.push(best.unwrap_or(0) as f64 / n);

        if sampler.remaining() == 0 {
            break StoppingReason::Exhausted;
        }
        if results.len() >= budget {
            break StoppingReason::BudgetExhausted;
        }
        if stale >= params.patience {
            break StoppingReason::Converged;
        }
        if history.len() >= params.stability_window {
            let window = &history[history.len() - params.stability_window..];
            let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
            if hi - lo <= params.stability_eps {
                break StoppingReason::Stable;
            }
        }
    };
    Ok(EstimateResult::from_results(Method::Adaptive, results, reason, None))
}
