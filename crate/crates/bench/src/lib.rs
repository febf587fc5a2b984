//! Shared inputs for the criterion benchmarks.

use boostcal_core::calib::CalibrationSet;
use boostcal_core::synthetic::additive_logistic;

/// Calibration pairs drawn from a fixed additive-logistic task: scores are
/// the true probabilities, labels their Bernoulli draws.
pub fn calibration_points(n: usize, seed: u64) -> CalibrationSet {
    let (d, probs) = additive_logistic(n, &[2.0, -1.5, 0.8], seed);
    CalibrationSet::from_pairs(probs, d.labels().to_vec()).expect("valid pairs")
}
