//! Axis-aligned minimum accuracy of feature maps.
//!
//! The crate computes, for a labeled binary dataset embedded by a feature
//! map, the best training accuracy attainable by a single-axis threshold
//! classifier (`R_min`). That value lower-bounds the training accuracy of
//! every linear classifier in the same feature space. On top of the exact
//! scan sit Monte Carlo estimators that sample a subset of axes and never
//! overshoot the exact value, along with the hypergeometric coverage
//! formulas used to size those samples.
//!
//! Modules:
//! - [`axiscore`]: threshold scans, exact `R_min`, linear witnesses.
//! - [`sampling`]: coverage probabilities, sample sizing, estimators.
//! - [`featmap`]: tanh random-projection proxy and a dense Pauli simulator.
//! - [`datagen`]: synthetic datasets, standardization, stratified splits.
//! - [`svmref`]: SMO-trained linear and RBF SVM baselines.
//! - [`harness`]: experiment pipeline, reports and the config format.

pub mod axiscore;
pub mod datagen;
pub mod error;
pub mod featmap;
pub mod harness;
pub mod sampling;
pub mod svmref;

pub use axiscore::{
    axis_accuracy, classifier_accuracy, r_min_deterministic, AxisResult, AxisSource,
    FeatureMatrix, LabeledDataset, LinearClassifier, MinAccuracy, Orientation,
    ThresholdClassifier,
};
pub use error::{Error, Result};
