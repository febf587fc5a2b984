//! Boosting and probability calibration toolkit.
//!
//! Trains AdaBoost ensembles over decision stumps and depth-limited trees,
//! exposes both the raw ensemble score `F(x)` and the vote-share score
//! `f(x) ∈ [0, 1]`, and maps scores to calibrated probabilities with three
//! methods: the closed-form logistic correction, Platt scaling (a fitted
//! two-parameter sigmoid), and isotonic regression solved exactly by
//! pair-adjacent violators. Calibration quality is measured with the Brier
//! score, cross-entropy, ROC AUC, reliability diagrams and prediction
//! histograms.
//!
//! All randomized operations (splits, folds, synthetic data) are driven by
//! an explicitly seeded ChaCha8 stream so results reproduce bit-for-bit
//! across runs and platforms.

pub mod boost;
pub mod bundle;
pub mod calib;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod metrics;
mod rng;
pub mod synthetic;
pub mod weak;

pub use boost::{BaseSpec, BoostConfig, BoostedEnsemble, Loss};
pub use bundle::ModelBundle;
pub use calib::{CalibrationSet, IsotonicCalibrator, SigmoidCalibrator};
pub use dataset::{Dataset, FoldPartition, SplitSpec};
pub use error::Error;
pub use weak::{Stump, Tree, WeakModel, WeightVector};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
