use std::path::Path;
use std::process::{Command, Output};

use minacc::datagen::load_dataset_csv;
use minacc::featmap::io as featio;
use minacc::featmap::{pauli_feature_matrix, EncodingCircuitSpec};
use minacc::r_min_deterministic;

fn minacc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minacc")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn coverage_prints_required_size() {
    let out = minacc(&["coverage", "--d", "65536", "--p", "0.25", "--delta", "0.05"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("required t = 12"));
}

#[test]
fn coverage_with_explicit_t() {
    let out = minacc(&["coverage", "--d", "10", "--p", "0.3", "--t", "2", "--delta", "0.05"]);
    let text = stdout(&out);
    assert!(text.contains("exact coverage = 0.533333"), "{text}");
    assert!(text.contains("bernoulli bound = 0.510000"), "{text}");
}

#[test]
fn unknown_flag_exits_with_usage() {
    let out = minacc(&["coverage", "--d", "10", "--p", "0.3", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn runtime_error_exits_nonzero_with_message() {
    let out = minacc(&["coverage", "--d", "10", "--p", "0", "--delta", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn det_on_pauli_matrix_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("circles.csv");
    let feats = dir.path().join("circles.mafm");
    let out = minacc(&["gen-data", "--dataset", "circles", "--n-samples", "30", "--seed", "3", "--standardize", "--out", p(&data)]);
    assert!(out.status.success());
    let out = minacc(&["embed", "--data", p(&data), "--embedding", "pauli", "--qubits", "2", "--out", p(&feats)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let dataset = load_dataset_csv(&data).unwrap();
    let direct = pauli_feature_matrix(&dataset, &EncodingCircuitSpec::new(2)).unwrap();
    let loaded = featio::load(&feats).unwrap();
    assert_eq!(loaded, direct);
    let expected = r_min_deterministic(&direct, dataset.labels()).unwrap();

    let out = minacc(&["minacc", "--features", p(&feats), "--data", p(&data), "--method", "det", "--format", "json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["r_hat"].as_f64().unwrap(), expected.r_min);
    assert_eq!(json["axes_evaluated"].as_u64().unwrap(), 16);
    assert_eq!(json["best_axis"].as_u64().unwrap() as usize, expected.best.axis_index);
}

#[test]
fn sampled_methods_run_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("lin.csv");
    let feats = dir.path().join("lin.csv.features.csv");
    assert!(minacc(&["gen-data", "--dataset", "linear-separable", "--n-samples", "40", "--out", p(&data)]).status.success());
    assert!(minacc(&["embed", "--data", p(&data), "--qubits", "3", "--seed", "5", "--out", p(&feats)]).status.success());
    let out = minacc(&["minacc", "--features", p(&feats), "--data", p(&data), "--method", "conservative", "--p", "0.25", "--seed", "4"]);
    assert!(stdout(&out).contains("axes_evaluated = 12"));
    let out = minacc(&[
        "minacc", "--features", p(&feats), "--data", p(&data), "--method", "pilot", "--n-pilot", "8", "--seed", "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = minacc(&[
        "minacc", "--features", p(&feats), "--data", p(&data), "--method", "adaptive", "--batch-size", "5",
        "--patience", "2", "--budget-fraction", "0.5",
    ]);
    assert!(out.status.success());
    assert!(minacc(&["minacc", "--features", p(&feats), "--data", p(&data), "--method", "bogus"]).status.code() == Some(2));
}

#[test]
fn svm_trains_and_saves_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("c.csv");
    let model = dir.path().join("model.json");
    assert!(minacc(&["gen-data", "--dataset", "circles", "--n-samples", "60", "--standardize", "--out", p(&data)]).status.success());
    let out = minacc(&["svm", "--data", p(&data), "--kernel", "rbf", "--test", p(&data), "--out", p(&model)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("training accuracy = "));
    let parsed = minacc::svmref::SvmModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(parsed.dual_coefficients.len(), 60);
}

#[test]
fn experiment_writes_report_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "datasets = [\"circles\"]\nqubits = 2\nn_samples = 120\nn_train = 30\nrepetitions = 2\nn_pilot = 4\ncap_fraction = 0.5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = minacc(&[
        "experiment", "--config", p(&config), "--seed", "3", "--method", "det", "--method", "conservative", "--p", "0.25",
        "--out", p(&out_dir), "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("dataset,method,p,rep,r_hat,axes_evaluated,stop_reason,svm_linear,svm_rbf,wall_ms\n"));
    assert!(csv.contains("circles,conservative,0.250000,1,"));
    assert!(!csv.contains("pilot"));
    let out = minacc(&["experiment", "--config", p(&config), "--out", p(&out_dir), "--format", "json"]);
    assert!(out.status.success());
    assert!(out_dir.join("report.json").exists());
}
