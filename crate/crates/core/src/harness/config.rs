//! Experiment configuration.
//!
//! Configs are flat TOML key/value files. Every key is optional; missing
//! keys take the defaults of [`ExperimentConfig::default`]. Unknown keys are
//! rejected.
//!
//! ```toml
//! datasets = ["linear_separable", "multi_cluster", "circles"]
//! qubits = 8
//! embedding = "proxy"
//! methods = ["det", "conservative", "pilot", "adaptive"]
//! p_values = [0.05, 0.15, 0.25]
//! delta = 0.05
//! repetitions = 10
//! seed = 2024
//! output_dir = "results"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::DatasetKind;
use crate::error::{Error, Result};
use crate::featmap::{EncodingCircuitSpec, Entangler};
use crate::sampling::{AdaptiveParams, Method, PilotParams};
use crate::svmref::SvmParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    Proxy,
    Pauli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetKind>,
    pub n_samples: usize,
    pub train_fraction: f64,
    pub n_train: usize,
    /// `d = 4^qubits` feature axes.
    pub qubits: usize,
    pub embedding: EmbeddingKind,
    pub circuit_layers: usize,
    pub rotation_scale: f64,
    pub methods: Vec<Method>,
    /// Priors swept by the conservative estimator.
    pub p_values: Vec<f64>,
    pub delta: f64,
    pub n_pilot: usize,
    pub cap_fraction: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub stability_eps: f64,
    pub stability_window: usize,
    pub budget_fraction: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub svm_c: f64,
    pub svm_tol: f64,
    pub svm_max_iter: usize,
    /// Also train a linear SVM on the embedded features.
    pub svm_on_features: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let pilot = PilotParams::default();
        let adaptive = AdaptiveParams::default();
        let svm = SvmParams::default();
        Self {
            datasets: DatasetKind::ALL.to_vec(),
            n_samples: 1000,
            train_fraction: 0.7,
            n_train: 100,
            qubits: 8,
            embedding: EmbeddingKind::Proxy,
            circuit_layers: 2,
            rotation_scale: 1.0,
            methods: vec![Method::Deterministic, Method::Conservative, Method::Pilot, Method::Adaptive],
            p_values: vec![0.05, 0.15, 0.25],
            delta: 0.05,
            n_pilot: pilot.n_pilot,
            cap_fraction: pilot.cap_fraction,
            batch_size: adaptive.batch_size,
            patience: adaptive.patience,
            stability_eps: adaptive.stability_eps,
            stability_window: adaptive.stability_window,
            budget_fraction: adaptive.budget_fraction,
            repetitions: 10,
            seed: 0,
            output_dir: PathBuf::from("results"),
            svm_c: svm.c,
            svm_tol: svm.tol,
            svm_max_iter: svm.max_iter,
            svm_on_features: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.qubits == 0 || self.qubits > 15 {
            return bad("qubits must be in 1..=15");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.p_values.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return bad("p_values must lie in (0, 1]");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if self.n_train > self.n_samples {
            return bad("n_train exceeds n_samples");
        }
        Ok(())
    }

    pub fn axis_count(&self) -> usize {
        1usize << (2 * self.qubits)
    }

    pub fn pilot_params(&self) -> PilotParams {
        PilotParams { n_pilot: self.n_pilot, delta: self.delta, cap_fraction: self.cap_fraction }
    }

    pub fn adaptive_params(&self) -> AdaptiveParams {
        AdaptiveParams {
            batch_size: self.batch_size,
            patience: self.patience,
            stability_eps: self.stability_eps,
            stability_window: self.stability_window,
            budget_fraction: self.budget_fraction,
        }
    }

    pub fn svm_params(&self) -> SvmParams {
        SvmParams { c: self.svm_c, tol: self.svm_tol, max_iter: self.svm_max_iter }
    }

    pub fn circuit(&self) -> EncodingCircuitSpec {
        EncodingCircuitSpec {
            qubit_count: self.qubits,
            layers: self.circuit_layers,
            entangler: Entangler::RingCz,
            rotation_scale: self.rotation_scale,
        }
    }
}

/// FNV-1a over the bytes of `key`.
fn fnv1a(key: &str) -> u64 {
    key.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for a pipeline stage: `master ^ splitmix64(fnv1a(parts joined
/// by '|'))`. Each tuple of parts gets an independent, re-derivable seed.
pub fn sub_seed(master: u64, parts: &[&str]) -> u64 {
    master ^ mix(fnv1a(&parts.join("|")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_setup() {
        let c = ExperimentConfig::default();
        assert_eq!(c.axis_count(), 65_536);
        assert_eq!(c.n_train, 100);
        assert_eq!(c.p_values, vec![0.05, 0.15, 0.25]);
        assert_eq!(c.repetitions, 10);
    }

    #[test]
    fn parses_flat_toml() {
        let c = ExperimentConfig::from_toml_str(
            "# reduced sweep\ndatasets = [\"circles\"]\nqubits = 2\nmethods = [\"det\", \"conservative\"]\nrepetitions = 2\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(c.datasets, vec![DatasetKind::Circles]);
        assert_eq!(c.methods, vec![Method::Deterministic, Method::Conservative]);
        assert_eq!(c.axis_count(), 16);
        assert_eq!(c.delta, 0.05);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml_str("qubitz = 3").is_err());
        assert!(ExperimentConfig::from_toml_str("p_values = [0.0]").is_err());
        assert!(ExperimentConfig::from_toml_str("repetitions = 0").is_err());
    }

    #[test]
    fn sub_seeds_differ_by_tuple() {
        let a = sub_seed(1, &["circles", "pilot", "", "0"]);
        let b = sub_seed(1, &["circles", "pilot", "", "1"]);
        assert_ne!(a, b);
        assert_eq!(a, sub_seed(1, &["circles", "pilot", "", "0"]));
        assert_eq!(a ^ 1, sub_seed(0, &["circles", "pilot", "", "0"]));
    }
}
