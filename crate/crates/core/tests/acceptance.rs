//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use minacc::axiscore::{as_linear_classifier, classifier_correct_count};
use minacc::featmap::pauli::bell_state;
use minacc::featmap::{encode_state, pauli_expectation, pauli_feature_matrix, pauli_string, EncodingCircuitSpec, PauliLetter};
use minacc::harness::{run_experiment, ExperimentConfig, ExperimentReport};
use minacc::sampling::{
    adaptive_estimate, conservative_estimate, coverage_probability_bound, coverage_probability_exact,
    deterministic_estimate, pilot_estimate, sample_size, AdaptiveParams, CoverageQuery, PilotParams, StoppingReason,
};
use minacc::{r_min_deterministic, FeatureMatrix, LabeledDataset};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn report(id: &str, name: &str, elapsed: Duration, budget: Option<Duration>, outcome: Outcome) -> bool {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = outcome.pass && in_time;
    let timing = match budget {
        Some(b) => format!("{:.3}s (budget {:.3}s)", elapsed.as_secs_f64(), b.as_secs_f64()),
        None => format!("{:.3}s", elapsed.as_secs_f64()),
    };
    println!("{} [{id}] {name}: {} | {timing}", if pass { "PASS" } else { "FAIL" }, outcome.detail);
    pass
}

fn timed(f: impl FnOnce() -> Outcome) -> (Duration, Outcome) {
    let start = Instant::now();
    let out = f();
    (start.elapsed(), out)
}

// 1

fn sample_sizes() -> Outcome {
    let got: Vec<usize> = [0.05, 0.15, 0.25].iter().map(|&p| sample_size(p, 0.05).unwrap()).collect();
    check(got == [60, 20, 12], format!("t = {got:?}, expected [60, 20, 12]"))
}

// 2

fn lower_bound_chain() -> Outcome {
    let mut rng = common::rng(2);
    let mut trials = 0;
    let mut failures = Vec::new();
    for trial in 0..120u64 {
        let n = rng.random_range(2..=200);
        let d = rng.random_range(1..=256);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0f64)).collect()).collect();
        let labels: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let truth = r_min_deterministic(&m, &labels).unwrap();
        let seed = rng.random::<u64>();
        let estimates = [
            deterministic_estimate(&m, &labels).unwrap(),
            conservative_estimate(&m, &labels, [0.05, 0.15, 0.25][trial as usize % 3], 0.05, seed).unwrap(),
            pilot_estimate(&m, &labels, &PilotParams { n_pilot: 100.min(d), ..PilotParams::default() }, seed).unwrap(),
            adaptive_estimate(&m, &labels, &AdaptiveParams::default(), seed).unwrap(),
        ];
        for e in &estimates {
            if e.best().correct_count > truth.best.correct_count {
                failures.push(format!("trial {trial}: {} above R_min", e.method));
            }
        }
        let witness = as_linear_classifier(&truth.best.classifier(), d).unwrap();
        let stump = classifier_correct_count(&truth.best.classifier(), &m, &labels).unwrap();
        if witness.correct_count(&m, &labels).unwrap() != truth.best.correct_count || stump != truth.best.correct_count {
            failures.push(format!("trial {trial}: witness count differs"));
        }
        trials += 1;
    }
    check(failures.is_empty(), format!("{trials} instances x 4 estimators, {} violations {:?}", failures.len(), failures))
}

// 3

fn brute_force_equivalence() -> Outcome {
    let mut rng = common::rng(3);
    let mut mismatches = 0;
    for _ in 0..50 {
        let inst = common::random_instance(&mut rng, 20, 10);
        let got = r_min_deterministic(&inst.matrix(), &inst.labels).unwrap();
        let oracle = common::brute_force_correct(&inst.rows, &inst.labels);
        if got.best.correct_count != oracle || got.r_min != oracle as f64 / inst.labels.len() as f64 {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("50 instances, {mismatches} mismatches"))
}

// 4

/// Four samples; the first `good` axes classify perfectly, the rest score 0.5.
fn planted(d: usize, good: usize) -> (FeatureMatrix, Vec<i8>) {
    let labels = vec![1, 1, -1, -1];
    let mut columns = Vec::with_capacity(4 * d);
    for i in 0..d {
        columns.extend_from_slice(if i < good { &[1.0, 1.0, 0.0, 0.0] } else { &[1.0, 0.0, 1.0, 0.0] });
    }
    (FeatureMatrix::from_column_major(4, d, columns).unwrap(), labels)
}

fn coverage_calibration() -> Outcome {
    let d = 200;
    let mut lines = Vec::new();
    let mut pass = true;
    for (p_true, p_prior) in [(0.05, 0.25), (0.1, 0.15), (0.05, 0.05)] {
        let good = (p_true * d as f64).round() as usize;
        let (m, labels) = planted(d, good);
        let t = sample_size(p_prior, 0.05).unwrap();
        let hits = (0..2000u64)
            .filter(|&s| conservative_estimate(&m, &labels, p_prior, 0.05, s).unwrap().r_hat >= 1.0)
            .count();
        let freq = hits as f64 / 2000.0;
        let exact = coverage_probability_exact(&CoverageQuery { d, p: p_true, t, eta: 1.0, delta: 0.05 }).unwrap();
        pass &= (freq - exact).abs() <= 0.03;
        lines.push(format!("p={p_true} t={t}: freq {freq:.4} vs exact {exact:.4}"));
    }
    check(pass, lines.join("; "))
}

fn coverage_grid() -> Outcome {
    let mut points = 0;
    let mut violations = Vec::new();
    let mut integral_violations = 0;
    for d in [10usize, 100, 1000] {
        for p in [0.05, 0.1, 0.25, 0.5] {
            // t > d is outside the query domain
            for t in 1..=20.min(d) {
                let q = CoverageQuery { d, p, t, eta: 0.0, delta: 0.05 };
                let exact = coverage_probability_exact(&q).unwrap();
                let bound = coverage_probability_bound(&q);
                points += 1;
                if exact < bound - 1e-12 {
                    violations.push(format!("(d={d},p={p},t={t}: {exact:.4}<{bound:.4})"));
                    if (p * d as f64).fract() == 0.0 {
                        integral_violations += 1;
                    }
                }
            }
        }
    }
    let shown: Vec<&String> = violations.iter().take(4).collect();
    check(
        violations.is_empty(),
        format!(
            "{points} grid points, {} below bound ({integral_violations} with integral p*d), e.g. {shown:?}",
            violations.len()
        ),
    )
}

// 5

fn kron(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); na * nb]; na * nb];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_matrix(l: PauliLetter) -> Vec<Vec<Complex64>> {
    match l {
        PauliLetter::I => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        PauliLetter::X => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        PauliLetter::Y => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        PauliLetter::Z => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

fn apply(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Kronecker-product operator placing `single` on qubit `q`; qubit 0 is
/// the leftmost factor.
fn on_qubit(single: &[Vec<Complex64>], q: usize, n: usize) -> Vec<Vec<Complex64>> {
    let id = letter_matrix(PauliLetter::I);
    let mut out = vec![vec![c(1.0, 0.0)]];
    for j in 0..n {
        out = kron(&out, if j == q { single } else { &id });
    }
    out
}

/// Dense-matrix circuit: per layer RY(x_j) on every qubit, then CZ around
/// the ring (one edge for two qubits).
fn dense_state(x: &[f64], n: usize, layers: usize) -> Vec<Complex64> {
    let dim = 1 << n;
    let mut state = vec![c(0.0, 0.0); dim];
    state[0] = c(1.0, 0.0);
    let edges: Vec<(usize, usize)> = match n {
        1 => vec![],
        2 => vec![(0, 1)],
        _ => (0..n).map(|j| (j, (j + 1) % n)).collect(),
    };
    for _ in 0..layers {
        for j in 0..n {
            let (s, co) = (x[j % x.len()] / 2.0).sin_cos();
            let ry = vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]];
            state = apply(&on_qubit(&ry, j, n), &state);
        }
        for &(a, b) in &edges {
            // CZ = (I + Z_a + Z_b - Z_a Z_b) / 2
            let za = on_qubit(&letter_matrix(PauliLetter::Z), a, n);
            let zb = on_qubit(&letter_matrix(PauliLetter::Z), b, n);
            let (va, vb) = (apply(&za, &state), apply(&zb, &state));
            let vab = apply(&za, &vb);
            state = (0..dim).map(|k| (state[k] + va[k] + vb[k] - vab[k]) * 0.5).collect();
        }
    }
    state
}

fn dense_expectation(state: &[Complex64], letters: &[PauliLetter]) -> f64 {
    let mut op = vec![vec![c(1.0, 0.0)]];
    for &l in letters {
        op = kron(&op, &letter_matrix(l));
    }
    let v = apply(&op, state);
    state.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

fn pauli_correctness() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let bell = bell_state();
    let e = |s: &str| {
        let idx = s.chars().fold(0, |acc, ch| acc * 4 + "IXYZ".find(ch).unwrap());
        pauli_expectation(&bell, &pauli_string(idx, 2).unwrap()).unwrap()
    };
    let (xx, yy, zz, ii) = (e("XX"), e("YY"), e("ZZ"), e("II"));
    let bell_ok = (xx - 1.0).abs() < 1e-12 && (yy + 1.0).abs() < 1e-12 && (zz - 1.0).abs() < 1e-12;
    pass &= bell_ok && (ii - 1.0).abs() < 1e-12;
    notes.push(format!("bell XX/YY/ZZ = {xx:.3}/{yy:.3}/{zz:.3}"));

    let mut rng = common::rng(5);
    let mut max_oracle_err: f64 = 0.0;
    let mut max_purity_err: f64 = 0.0;
    let mut max_identity_err: f64 = 0.0;
    for n in 1..=3usize {
        let inputs: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let labels: Vec<i8> = (0..6).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect();
        let ds = LabeledDataset::new(inputs.clone(), labels).unwrap();
        let spec = EncodingCircuitSpec::new(n);
        let m = pauli_feature_matrix(&ds, &spec).unwrap();
        for (k, x) in inputs.iter().enumerate() {
            let dense = dense_state(x, n, spec.layers);
            let fast = encode_state(x, &spec).unwrap();
            for (a, b) in dense.iter().zip(&fast) {
                max_oracle_err = max_oracle_err.max((a - b).norm());
            }
            let row = m.row(k);
            for (i, &v) in row.iter().enumerate() {
                let letters = pauli_string(i, n).unwrap().letters;
                max_oracle_err = max_oracle_err.max((dense_expectation(&dense, &letters) - v).abs());
            }
            let purity: f64 = row.iter().map(|a| a * a).sum();
            max_purity_err = max_purity_err.max((purity - (1 << n) as f64).abs());
            max_identity_err = max_identity_err.max((row[0] - 1.0).abs());
        }
    }
    pass &= max_oracle_err <= 1e-10 && max_purity_err <= 1e-8 && max_identity_err <= 1e-12;
    notes.push(format!(
        "identity err {max_identity_err:.1e}, purity err {max_purity_err:.1e}, dense oracle err {max_oracle_err:.1e}"
    ));
    check(pass, notes.join("; "))
}

// 6, 7, 8

fn full_scale_config() -> ExperimentConfig {
    ExperimentConfig { repetitions: 3, seed: 2024, ..ExperimentConfig::default() }
}

fn full_scale(report: &ExperimentReport) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for d in &report.datasets {
        let r_min = d.r_min.unwrap_or(f64::NAN);
        notes.push(format!(
            "{}: R_min {:.3} ({:.0} ms), svm linear raw {:.3}, rbf raw {:.3}, linear features {:.3}",
            d.dataset,
            r_min,
            d.deterministic_ms,
            d.svm_linear_raw.unwrap_or(f64::NAN),
            d.svm_rbf_raw.unwrap_or(f64::NAN),
            d.svm_linear_features.unwrap_or(f64::NAN),
        ));
        // (a)
        pass &= d.error.is_none() && d.axis_count == 65_536 && d.n_train == 100 && d.deterministic_ms < 300_000.0;
        // (e) hyperplanes in the embedded space
        pass &= d.svm_linear_features.is_some_and(|s| s >= r_min - 0.02);
        match d.dataset.as_str() {
            // (c)
            "circles" => pass &= d.svm_rbf_raw.is_some_and(|s| s - r_min >= 0.1),
            // (d)
            "linear_separable" => pass &= r_min >= 0.9,
            _ => {}
        }
    }
    pass &= report.datasets.len() == 3;
    // (b)
    let cons: Vec<_> = report.rows.iter().filter(|r| r.method == "conservative" && r.p == Some(0.25)).collect();
    let cons_ok = !cons.is_empty()
        && cons.iter().all(|r| r.axes_evaluated == 12 && r.r_hat.is_some() && r.r_hat <= r.r_min);
    pass &= cons_ok && report.audit().is_empty();
    notes.push(format!("conservative p=0.25: {} rows, all 12 axes and within R_min: {cons_ok}", cons.len()));
    check(pass, notes.join("; "))
}

fn cost_envelope(report: &ExperimentReport) -> Outcome {
    let d = 65_536usize;
    let cap = (0.01 * d as f64).ceil() as usize;
    let pilot: Vec<usize> = report.rows.iter().filter(|r| r.method == "pilot").map(|r| r.axes_evaluated).collect();
    let adaptive: Vec<(usize, String)> = report
        .rows
        .iter()
        .filter(|r| r.method == "adaptive")
        .map(|r| (r.axes_evaluated, r.stop_reason.clone().unwrap_or_default()))
        .collect();
    let pilot_ok = !pilot.is_empty() && pilot.iter().all(|&a| a <= cap);
    let allowed = [StoppingReason::Converged, StoppingReason::Stable, StoppingReason::BudgetExhausted].map(|s| s.as_str());
    let adaptive_ok =
        !adaptive.is_empty() && adaptive.iter().all(|(a, s)| *a < d && allowed.contains(&s.as_str()));
    let range = |v: &[usize]| (v.iter().min().copied().unwrap_or(0), v.iter().max().copied().unwrap_or(0));
    let adaptive_counts: Vec<usize> = adaptive.iter().map(|(a, _)| *a).collect();
    check(
        pilot_ok && adaptive_ok,
        format!(
            "pilot axes {:?} (cap {cap}), adaptive axes {:?} via {:?}",
            range(&pilot),
            range(&adaptive_counts),
            adaptive.iter().map(|(_, s)| s.as_str()).collect::<std::collections::BTreeSet<_>>()
        ),
    )
}

fn determinism(first: &ExperimentReport, config: &ExperimentConfig) -> Outcome {
    let second = run_experiment(config).unwrap();
    let same = first.without_timing() == second.without_timing();
    let mut a = Vec::new();
    let mut b = Vec::new();
    minacc::harness::write_report_csv(first, false, &mut a).unwrap();
    minacc::harness::write_report_csv(&second, false, &mut b).unwrap();
    check(same && a == b, format!("{} rows, reports identical: {same}, csv identical: {}", first.rows.len(), a == b))
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;

    let (t, o) = timed(sample_sizes);
    all &= report("1", "sample-size reproduction", t, Some(Duration::from_millis(1)), o);
    let (t, o) = timed(lower_bound_chain);
    all &= report("2", "lower-bound chain", t, Some(secs(10)), o);
    let (t, o) = timed(brute_force_equivalence);
    all &= report("3", "brute-force oracle equivalence", t, Some(secs(1)), o);
    let (t4a, o) = timed(coverage_calibration);
    all &= report("4a", "coverage calibration", t4a, Some(secs(30)), o);
    let (t, o) = timed(coverage_grid);
    all &= report("4b", "exact coverage >= Bernoulli bound on grid", t, Some(secs(30) - t4a), o);
    let (t, o) = timed(pauli_correctness);
    all &= report("5", "Pauli simulator correctness", t, Some(secs(5)), o);

    let config = full_scale_config();
    let start = Instant::now();
    let experiment = run_experiment(&config).unwrap();
    let run_time = start.elapsed();
    let (t, o) = timed(|| full_scale(&experiment));
    all &= report("6", "full-scale pipeline", run_time + t, None, o);
    let (t, o) = timed(|| cost_envelope(&experiment));
    all &= report("7", "estimator cost envelope", t, None, o);
    let (t, o) = timed(|| determinism(&experiment, &config));
    all &= report("8", "determinism", t, Some(run_time * 2 + secs(1)), o);

    if !all {
        println!("acceptance: some criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
