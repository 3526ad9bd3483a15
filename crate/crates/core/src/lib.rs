//! Wavelet-fusion seizure detection for single-channel EEG.
//!
//! Records are decomposed with a five-level Haar transform, each subband is
//! reduced to `L` features (PCA, ICA or LDA), the detail bands are collapsed
//! with a MAX rule and blended with the approximation band, and the fused
//! vector is classified by SVM, naive Bayes or KNN under stratified k-fold
//! cross-validation.

pub mod classify;
pub mod dataset;
pub mod dimred;
pub mod dwt;
pub mod evaluate;
pub mod fusion;
pub mod numerics;
pub mod reference;
pub mod report;
pub mod synthetic;

pub use classify::{ClassifierConfig, ClassifierKind, KernelSpec};
pub use dataset::{BonnSet, Label, Pair, PairDataset};
pub use dimred::{FitMode, Method};
pub use evaluate::{run_experiment, sweep, EvalReport, ExperimentConfig};
pub use fusion::{FusionWeights, MaxMode};
