//! Score-to-probability calibration: logistic correction, Platt scaling and
//! PAV isotonic regression, plus cross-validated calibration-set
//! construction.
//!
//! Logistic correction is the closed-form map `P = 1/(1 + exp(-2F))` applied
//! to the raw ensemble score. Platt scaling fits `P = 1/(1 + exp(A f + B))`
//! to held-out `(f, y)` pairs by maximum likelihood with smoothed
//! out-of-sample targets. Isotonic regression fits the least-squares
//! monotone step function by pair-adjacent violators.

use serde::{Deserialize, Serialize};

use crate::boost::{boost_train, BoostConfig, BoostedEnsemble};
use crate::dataset::{kfold_partition, Dataset};
use crate::error::{fit, shape};
use crate::Result;

/// Numerically stable `1 / (1 + exp(-u))`.
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        let e = (-u).exp();
        1.0 / (1.0 + e)
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Stable `ln(1 + exp(u))`.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// Closed-form correction of a raw boosting score: `1 / (1 + exp(-2F))`.
/// Strictly increasing in `F`; equals [`SigmoidCalibrator`] with
/// parameters (-2, 0).
///
/// The factor 2 matches the exponential loss, whose population minimizer is
/// half the log-odds.
pub fn logistic_correction(raw_score: f64) -> f64 {
    sigmoid(2.0 * raw_score)
}

/// Plain inverse logit `1 / (1 + exp(-F))`: the native probability map for
/// scores trained under log-loss, whose population minimizer is the full
/// log-odds.
pub fn inverse_logit(raw_score: f64) -> f64 {
    sigmoid(raw_score)
}

/// Smoothed out-of-sample target values for Platt scaling:
/// `y+ = (N+ + 1) / (N+ + 2)` and `y- = 1 / (N- + 2)`.
pub fn platt_targets(n_plus: usize, n_minus: usize) -> (f64, f64) {
    let y_plus = (n_plus as f64 + 1.0) / (n_plus as f64 + 2.0);
    let y_minus = 1.0 / (n_minus as f64 + 2.0);
    (y_plus, y_minus)
}

/// Two-parameter sigmoid `P(y=1|f) = 1 / (1 + exp(A f + B))`. Monotone
/// increasing as a calibrator exactly when `A < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidCalibrator {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

impl SigmoidCalibrator {
    pub fn new(a: f64, b: f64) -> SigmoidCalibrator {
        SigmoidCalibrator { a, b }
    }

    /// The fixed-parameter instance that realizes logistic correction when
    /// applied to the raw score `F`.
    pub fn logistic_correction() -> SigmoidCalibrator {
        SigmoidCalibrator { a: -2.0, b: 0.0 }
    }

    pub fn apply(&self, f: f64) -> f64 {
        sigmoid(-(self.a * f + self.b))
    }

    pub fn is_increasing(&self) -> bool {
        self.a < 0.0
    }
}

/// Calibration pairs: scores with {0,1} targets and class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    scores: Vec<f64>,
    targets: Vec<u8>,
    n_plus: usize,
    n_minus: usize,
}

impl CalibrationSet {
    pub fn from_pairs(scores: Vec<f64>, targets: Vec<u8>) -> Result<CalibrationSet> {
        if scores.is_empty() {
            return Err(shape("calibration set is empty"));
        }
        if scores.len() != targets.len() {
            return Err(shape(format!(
                "{} scores vs {} targets",
                scores.len(),
                targets.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(shape("non-finite calibration score"));
        }
        if targets.iter().any(|&t| t > 1) {
            return Err(shape("calibration targets must be 0 or 1"));
        }
        let n_plus = targets.iter().filter(|&&t| t == 1).count();
        let n_minus = targets.len() - n_plus;
        Ok(CalibrationSet { scores, targets, n_plus, n_minus })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn targets(&self) -> &[u8] {
        &self.targets
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }
}

/// Result of [`platt_fit`]: the calibrator plus optimizer diagnostics.
/// `converged == false` means the iteration cap was hit and the best iterate
/// is returned.
#[derive(Debug, Clone, PartialEq)]
pub struct PlattFit {
    pub calibrator: SigmoidCalibrator,
    pub converged: bool,
    pub iterations: usize,
    pub nll: f64,
}

const PLATT_MAX_ITER: usize = 200;
const PLATT_STEP_TOL: f64 = 1e-10;
const PLATT_NLL_TOL: f64 = 1e-12;

/// Negative log-likelihood of the sigmoid with soft targets.
fn platt_nll(scores: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    let mut nll = 0.0;
    for (&f, &t) in scores.iter().zip(targets) {
        let z = a * f + b;
        // -ln p = softplus(z); -ln(1-p) = softplus(-z)
        nll += t * softplus(z) + (1.0 - t) * softplus(-z);
    }
    nll
}

/// Fit the Platt sigmoid by Newton's method with backtracking line search.
///
/// Targets are replaced by the smoothed [`platt_targets`] values; the start
/// point is `A = 0`, `B = ln((N- + 1) / (N+ + 1))`. Converges when the step
/// infinity-norm drops below 1e-10 or the objective decrease below 1e-12,
/// capped at 200 iterations.
pub fn platt_fit(cs: &CalibrationSet) -> Result<PlattFit> {
    if cs.n_plus() == 0 || cs.n_minus() == 0 {
        return Err(fit(format!(
            "calibration set needs both classes ({} positive, {} negative)",
            cs.n_plus(),
            cs.n_minus()
        )));
    }
    let (y_plus, y_minus) = platt_targets(cs.n_plus(), cs.n_minus());
    let targets: Vec<f64> = cs
        .targets()
        .iter()
        .map(|&y| if y == 1 { y_plus } else { y_minus })
        .collect();
    let scores = cs.scores();

    let mut a = 0.0f64;
    let mut b = ((cs.n_minus() as f64 + 1.0) / (cs.n_plus() as f64 + 1.0)).ln();
    let mut nll = platt_nll(scores, &targets, a, b);
    let mut best = (a, b, nll);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=PLATT_MAX_ITER {
        iterations = iter;
        let mut ga = 0.0;
        let mut gb = 0.0;
        let mut haa = 0.0;
        let mut hab = 0.0;
        let mut hbb = 0.0;
        for (&f, &t) in scores.iter().zip(&targets) {
            let p = sigmoid(-(a * f + b));
            let r = t - p;
            ga += r * f;
            gb += r;
            // Floor keeps the Hessian usable when predictions saturate.
            let d = (p * (1.0 - p)).max(1e-12);
            haa += d * f * f;
            hab += d * f;
            hbb += d;
        }

        let mut det = haa * hbb - hab * hab;
        let scale = haa + hbb;
        if !(det > 1e-12 * scale * scale) {
            // Singular direction (e.g. constant scores): ridge the diagonal
            // so the step degenerates gracefully toward gradient descent.
            let tau = 1e-8 * scale + 1e-12;
            haa += tau;
            hbb += tau;
            det = haa * hbb - hab * hab;
        }
        let da = -(hbb * ga - hab * gb) / det;
        let db = -(haa * gb - hab * ga) / det;
        let descent = ga * da + gb * db;

        let mut step = 1.0f64;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = platt_nll(scores, &targets, a + step * da, b + step * db);
            if cand <= nll + 1e-4 * step * descent {
                let decrease = nll - cand;
                a += step * da;
                b += step * db;
                nll = cand;
                accepted = true;
                if nll < best.2 {
                    best = (a, b, nll);
                }
                let step_norm = (step * da).abs().max((step * db).abs());
                if step_norm < PLATT_STEP_TOL || decrease < PLATT_NLL_TOL {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent step exists at this resolution: treat as converged.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let (a, b, nll) = best;
    Ok(PlattFit {
        calibrator: SigmoidCalibrator::new(a, b),
        converged,
        iterations,
        nll,
    })
}

/// Stepwise-constant non-decreasing calibrator produced by [`pav_fit`].
///
/// `breakpoints[j]` is the largest score pooled into block `j`; a score `f`
/// maps to the first block with `f <= breakpoint` (the boundary belongs to
/// the block on its left) and clamps to the end blocks outside the observed
/// range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicCalibrator {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl IsotonicCalibrator {
    pub fn apply(&self, f: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&bp| bp < f);
        if idx >= self.values.len() {
            *self.values.last().expect("non-empty calibrator")
        } else {
            self.values[idx]
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.values.len()
    }
}

/// Exact isotonic regression by pair-adjacent violators.
///
/// Points are sorted by score; identical scores are pre-pooled into one
/// weighted block (a function of the score cannot distinguish them).
/// Adjacent blocks are then merged by weighted averaging while a left block
/// value is >= its right neighbor, so the output block values are strictly
/// increasing and minimize the squared error over all non-decreasing
/// functions of the score.
pub fn pav_fit(cs: &CalibrationSet) -> Result<IsotonicCalibrator> {
    let n = cs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cs.scores[i].partial_cmp(&cs.scores[j]).unwrap());

    // Pre-pool tied scores.
    let mut pooled: Vec<(f64, f64, f64)> = Vec::new(); // (score, mean target, weight)
    let mut i = 0usize;
    while i < n {
        let s = cs.scores[order[i]];
        let mut sum = 0.0f64;
        let mut count = 0.0f64;
        while i < n && cs.scores[order[i]] == s {
            sum += f64::from(cs.targets[order[i]]);
            count += 1.0;
            i += 1;
        }
        pooled.push((s, sum / count, count));
    }

    // PAV over pooled blocks: (upper score edge, value, weight).
    let mut blocks: Vec<(f64, f64, f64)> = Vec::with_capacity(pooled.len());
    for (score, value, weight) in pooled {
        blocks.push((score, value, weight));
        while blocks.len() >= 2 {
            let right = blocks[blocks.len() - 1];
            let left = blocks[blocks.len() - 2];
            if left.1 < right.1 {
                break;
            }
            let w = left.2 + right.2;
            let v = (left.2 * left.1 + right.2 * right.1) / w;
            blocks.pop();
            blocks.pop();
            blocks.push((right.0, v, w));
        }
    }

    Ok(IsotonicCalibrator {
        breakpoints: blocks.iter().map(|b| b.0).collect(),
        values: blocks.iter().map(|b| b.1).collect(),
        weights: blocks.iter().map(|b| b.2).collect(),
    })
}

/// Cross-validated calibration scores: for each of `folds` folds, boost on
/// the complement and score the held-out fold with the normalized score.
///
/// The returned set covers every row of `d` exactly once, ordered by
/// (fold index, ascending row within fold); no example is scored by a model
/// trained on it.
pub fn cv_calibration_scores(
    d: &Dataset,
    cfg: &BoostConfig,
    folds: usize,
    seed: u64,
) -> Result<CalibrationSet> {
    let mut sets = cv_staged_calibration_sets(d, cfg, folds, seed, &[cfg.rounds])?;
    Ok(sets.pop().expect("one stage requested"))
}

/// Per-gridpoint variant of [`cv_calibration_scores`]: trains the fold
/// models once and assembles one calibration set per requested stage count.
/// Stage counts saturate at each fold model's trained length when boosting
/// stopped early.
pub fn cv_staged_calibration_sets(
    d: &Dataset,
    cfg: &BoostConfig,
    folds: usize,
    seed: u64,
    stages: &[usize],
) -> Result<Vec<CalibrationSet>> {
    cfg.validate()?;
    let partition = kfold_partition(d, folds, seed)?;
    let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(d.n_rows()); stages.len()];
    let mut targets: Vec<u8> = Vec::with_capacity(d.n_rows());
    for k in 0..folds {
        let train_rows = partition.complement_rows(k);
        let held_rows = partition.fold_rows(k);
        let train = d.subset(&train_rows, format!("{}.fold{k}.train", d.name()))?;
        let held = d.subset(&held_rows, format!("{}.fold{k}.held", d.name()))?;
        let ensemble = boost_train(&train, cfg)?;
        let capped: Vec<usize> = stages.iter().map(|&s| s.min(ensemble.rounds())).collect();
        let staged = ensemble.staged_normalized_scores(&held, &capped)?;
        for (row, fold_scores) in staged.into_iter().enumerate() {
            scores[row].extend(fold_scores);
        }
        targets.extend(held.labels());
    }
    scores
        .into_iter()
        .map(|s| CalibrationSet::from_pairs(s, targets.clone()))
        .collect()
}

/// Calibration scores taken directly from data the ensemble already saw.
/// This is the biased shortcut that cross-validation exists to avoid; it is
/// exposed for demonstrating that bias.
pub fn train_set_scores(d: &Dataset, ensemble: &BoostedEnsemble) -> Result<CalibrationSet> {
    let scores = ensemble.normalized_scores(d)?;
    CalibrationSet::from_pairs(scores, d.labels().to_vec())
}
