//! Experiment orchestration: iteration selection on a held-out validation
//! set, the five-way calibration comparison table, and calibration-set-size
//! learning curves.
//!
//! Every run is a pure function of `(data, config)`: sub-seeds for splits,
//! folds and trials derive from the master seed, so reruns emit identical
//! tables byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::boost::{boost_train, BaseSpec, BoostConfig, BoostedEnsemble, Loss};
use crate::calib::{
    cv_staged_calibration_sets, inverse_logit, logistic_correction, pav_fit, platt_fit,
    CalibrationSet,
};
use crate::dataset::{stratified_split, stratified_take, Dataset, SplitSpec};
use crate::error::config;
use crate::metrics::{brier_score, cross_entropy, roc_auc};
use crate::rng::derive_seed;
use crate::Result;

/// Metric used to pick the iteration count on the validation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    CrossEntropy,
    Brier,
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub base: BaseSpec,
    pub loss: Loss,
    /// Strictly increasing boosting-round gridpoints.
    pub grid: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub train_fraction: f64,
    /// Validation rows held out for iteration selection; `None` takes half
    /// of the non-train remainder.
    pub validation_size: Option<usize>,
    pub trials: usize,
    /// Calibration-set sizes for the learning-curve mode.
    pub calibration_sizes: Vec<usize>,
    pub selection_metric: SelectionMetric,
    pub clip_eps: f64,
}

impl ExperimentConfig {
    pub fn new(base: BaseSpec, loss: Loss, grid: Vec<usize>, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            base,
            loss,
            grid,
            folds: 3,
            seed,
            train_fraction: 0.5,
            validation_size: None,
            trials: 10,
            calibration_sizes: Vec::new(),
            selection_metric: SelectionMetric::CrossEntropy,
            clip_eps: crate::metrics::DEFAULT_CLIP_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(config("iteration grid is empty"));
        }
        if self.grid[0] == 0 {
            return Err(config("iteration gridpoints must be >= 1"));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(config("iteration grid must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(config("trials must be >= 1"));
        }
        if self.folds < 2 {
            return Err(config("folds must be >= 2"));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 0.5) {
            return Err(config("clip_eps must be in (0, 0.5)"));
        }
        Ok(())
    }

    fn boost_config(&self, rounds: usize, loss: Loss) -> BoostConfig {
        BoostConfig::new(rounds, loss, self.base)
    }
}

/// One gridpoint's calibrated validation predictions, as consumed by
/// [`select_iterations`].
#[derive(Debug, Clone)]
pub struct IterationCandidate {
    pub rounds: usize,
    pub probabilities: Vec<f64>,
}

/// Pick the gridpoint minimizing the metric on the validation labels; ties
/// break toward fewer iterations.
pub fn select_iterations(
    candidates: &[IterationCandidate],
    labels: &[u8],
    metric: SelectionMetric,
    clip_eps: f64,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(config("no iteration candidates to select from"));
    }
    if labels.is_empty() {
        return Err(config("validation set is empty"));
    }
    let mut best: Option<(usize, f64)> = None;
    let mut sorted: Vec<&IterationCandidate> = candidates.iter().collect();
    sorted.sort_by_key(|c| c.rounds);
    for cand in sorted {
        let value = match metric {
            SelectionMetric::CrossEntropy => cross_entropy(&cand.probabilities, labels, clip_eps)?,
            SelectionMetric::Brier => brier_score(&cand.probabilities, labels)?,
        };
        if best.map_or(true, |(_, b)| value < b) {
            best = Some((cand.rounds, value));
        }
    }
    Ok(best.expect("at least one candidate").0)
}

/// One row of the comparison table. `status` is `ok` or `error:<kind>`;
/// metric fields are empty on error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub dataset: String,
    pub base: String,
    pub loss: String,
    pub method: String,
    pub rounds: Option<usize>,
    pub brier: Option<f64>,
    pub cross_entropy: Option<f64>,
    pub auc: Option<f64>,
    pub status: String,
}

/// Comparison table emitted by [`run_calibration_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<MetricsRow>,
}

impl ExperimentReport {
    /// CSV with header `dataset,base,loss,method,rounds,brier,cross_entropy,auc,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,base,loss,method,rounds,brier,cross_entropy,auc,status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.dataset,
                r.base,
                r.loss,
                r.method,
                r.rounds.map(|v| v.to_string()).unwrap_or_default(),
                r.brier.map(|v| v.to_string()).unwrap_or_default(),
                r.cross_entropy.map(|v| v.to_string()).unwrap_or_default(),
                r.auc.map(|v| v.to_string()).unwrap_or_default(),
                r.status
            );
        }
        out
    }
}

struct EvaluatedMethod {
    rounds: usize,
    brier: f64,
    cross_entropy: f64,
    auc: f64,
}

/// Per-gridpoint probabilities on validation and test plus the metric
/// evaluation of the selected gridpoint.
fn select_and_evaluate(
    grid: &[usize],
    val_probs: &[Vec<f64>],
    test_probs: &[Vec<f64>],
    val_labels: &[u8],
    test_labels: &[u8],
    cfg: &ExperimentConfig,
) -> Result<EvaluatedMethod> {
    let candidates: Vec<IterationCandidate> = grid
        .iter()
        .zip(val_probs)
        .map(|(&rounds, probs)| IterationCandidate { rounds, probabilities: probs.clone() })
        .collect();
    let chosen = select_iterations(&candidates, val_labels, cfg.selection_metric, cfg.clip_eps)?;
    let idx = grid.iter().position(|&g| g == chosen).expect("chosen from grid");
    let probs = &test_probs[idx];
    Ok(EvaluatedMethod {
        rounds: chosen,
        brier: brier_score(probs, test_labels)?,
        cross_entropy: cross_entropy(probs, test_labels, cfg.clip_eps)?,
        auc: roc_auc(probs, test_labels)?,
    })
}

fn method_row(
    dataset: &str,
    cfg: &ExperimentConfig,
    loss: Loss,
    method: &str,
    outcome: Result<EvaluatedMethod>,
) -> MetricsRow {
    match outcome {
        Ok(m) => MetricsRow {
            dataset: dataset.to_string(),
            base: cfg.base.as_str(),
            loss: loss.as_str().to_string(),
            method: method.to_string(),
            rounds: Some(m.rounds),
            brier: Some(m.brier),
            cross_entropy: Some(m.cross_entropy),
            auc: Some(m.auc),
            status: "ok".to_string(),
        },
        Err(e) => MetricsRow {
            dataset: dataset.to_string(),
            base: cfg.base.as_str(),
            loss: loss.as_str().to_string(),
            method: method.to_string(),
            rounds: None,
            brier: None,
            cross_entropy: None,
            auc: None,
            status: format!("error:{}", e.kind()),
        },
    }
}

/// Gridpoints capped at the trained round count (early-stopped ensembles
/// saturate instead of erroring).
fn capped_grid(grid: &[usize], ensemble: &BoostedEnsemble) -> Vec<usize> {
    grid.iter().map(|&g| g.min(ensemble.rounds())).collect()
}

/// Train, calibrate, select and evaluate every method on one dataset.
///
/// Emits one row per method: `raw` (normalized scores as-is), `platt` and
/// `isotonic` (fit on cross-validated calibration scores, one calibrator
/// per gridpoint), `logistic` (closed-form correction of the raw score),
/// and `logloss` (a second ensemble trained under log-loss, reported
/// through its own inverse-logit link without any fitted calibrator).
/// Iterations are
/// always selected on the held-out validation part, never on test.
pub fn run_calibration_experiment(d: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = d.n_rows();
    let train_count = (cfg.train_fraction * n as f64).round() as usize;
    let remainder = n.saturating_sub(train_count);
    let val_size = cfg.validation_size.unwrap_or(remainder / 2);
    if val_size == 0 || val_size >= remainder {
        return Err(config(format!(
            "validation size {val_size} infeasible for {remainder} non-train rows"
        )));
    }
    let split = SplitSpec {
        train_fraction: cfg.train_fraction,
        calibration_size: val_size,
        seed: derive_seed(cfg.seed, &[1]),
    };
    let (train, val, test) = stratified_split(d, &split)?;

    let t_max = *cfg.grid.last().expect("validated non-empty grid");
    let ensemble = boost_train(&train, &cfg.boost_config(t_max, cfg.loss))?;
    let grid_eff = capped_grid(&cfg.grid, &ensemble);

    let f_val = ensemble.staged_normalized_scores(&val, &grid_eff)?;
    let f_test = ensemble.staged_normalized_scores(&test, &grid_eff)?;
    let raw_val = ensemble.staged_raw_scores(&val, &grid_eff)?;
    let raw_test = ensemble.staged_raw_scores(&test, &grid_eff)?;

    let mut rows = Vec::with_capacity(5);

    // raw: vote share, no calibration
    rows.push(method_row(
        d.name(),
        cfg,
        cfg.loss,
        "raw",
        select_and_evaluate(&cfg.grid, &f_val, &f_test, val.labels(), test.labels(), cfg),
    ));

    // platt / isotonic: cross-validated calibration scores per gridpoint
    let cv_seed = derive_seed(cfg.seed, &[2]);
    let cal_sets: Result<Vec<CalibrationSet>> = cv_staged_calibration_sets(
        &train,
        &cfg.boost_config(t_max, cfg.loss),
        cfg.folds,
        cv_seed,
        &grid_eff,
    );
    match cal_sets {
        Ok(cal_sets) => {
            let platt_outcome = (|| {
                let mut val_probs = Vec::new();
                let mut test_probs = Vec::new();
                for (g, set) in cal_sets.iter().enumerate() {
                    let c = platt_fit(set)?.calibrator;
                    val_probs.push(f_val[g].iter().map(|&f| c.apply(f)).collect());
                    test_probs.push(f_test[g].iter().map(|&f| c.apply(f)).collect());
                }
                select_and_evaluate(&cfg.grid, &val_probs, &test_probs, val.labels(), test.labels(), cfg)
            })();
            rows.push(method_row(d.name(), cfg, cfg.loss, "platt", platt_outcome));

            let iso_outcome = (|| {
                let mut val_probs = Vec::new();
                let mut test_probs = Vec::new();
                for (g, set) in cal_sets.iter().enumerate() {
                    let c = pav_fit(set)?;
                    val_probs.push(f_val[g].iter().map(|&f| c.apply(f)).collect());
                    test_probs.push(f_test[g].iter().map(|&f| c.apply(f)).collect());
                }
                select_and_evaluate(&cfg.grid, &val_probs, &test_probs, val.labels(), test.labels(), cfg)
            })();
            rows.push(method_row(d.name(), cfg, cfg.loss, "isotonic", iso_outcome));
        }
        Err(e) => {
            let status = format!("error:{}", e.kind());
            for method in ["platt", "isotonic"] {
                rows.push(MetricsRow {
                    dataset: d.name().to_string(),
                    base: cfg.base.as_str(),
                    loss: cfg.loss.as_str().to_string(),
                    method: method.to_string(),
                    rounds: None,
                    brier: None,
                    cross_entropy: None,
                    auc: None,
                    status: status.clone(),
                });
            }
        }
    }

    // logistic: closed-form correction of the raw score
    let logist_outcome = (|| {
        let val_probs: Vec<Vec<f64>> = raw_val
            .iter()
            .map(|row| row.iter().map(|&s| logistic_correction(s)).collect())
            .collect();
        let test_probs: Vec<Vec<f64>> = raw_test
            .iter()
            .map(|row| row.iter().map(|&s| logistic_correction(s)).collect())
            .collect();
        select_and_evaluate(&cfg.grid, &val_probs, &test_probs, val.labels(), test.labels(), cfg)
    })();
    rows.push(method_row(d.name(), cfg, cfg.loss, "logistic", logist_outcome));

    // logloss: retrain under log-loss, report through its own inverse-logit
    // link (no fitted calibrator)
    let logloss_outcome = (|| {
        let e_log = boost_train(&train, &cfg.boost_config(t_max, Loss::LogLoss))?;
        let grid_log = capped_grid(&cfg.grid, &e_log);
        let raw_val_log = e_log.staged_raw_scores(&val, &grid_log)?;
        let raw_test_log = e_log.staged_raw_scores(&test, &grid_log)?;
        let val_probs: Vec<Vec<f64>> = raw_val_log
            .iter()
            .map(|row| row.iter().map(|&s| inverse_logit(s)).collect())
            .collect();
        let test_probs: Vec<Vec<f64>> = raw_test_log
            .iter()
            .map(|row| row.iter().map(|&s| inverse_logit(s)).collect())
            .collect();
        select_and_evaluate(&cfg.grid, &val_probs, &test_probs, val.labels(), test.labels(), cfg)
    })();
    rows.push(method_row(d.name(), cfg, Loss::LogLoss, "logloss", logloss_outcome));

    Ok(ExperimentReport { rows })
}

/// Row kind in a learning-curve table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveRowKind {
    Trial,
    Mean,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub size: usize,
    pub kind: CurveRowKind,
    pub trial: Option<usize>,
    pub brier: Option<f64>,
    pub stderr: Option<f64>,
    pub note: String,
}

/// Learning-curve table emitted by [`run_learning_curve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub rows: Vec<CurveRow>,
}

impl CurveReport {
    /// CSV with header `method,size,kind,trial,brier,stderr,note`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,size,kind,trial,brier,stderr,note\n");
        for r in &self.rows {
            let kind = match r.kind {
                CurveRowKind::Trial => "trial",
                CurveRowKind::Mean => "mean",
                CurveRowKind::Skip => "skip",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.method,
                r.size,
                kind,
                r.trial.map(|v| v.to_string()).unwrap_or_default(),
                r.brier.map(|v| v.to_string()).unwrap_or_default(),
                r.stderr.map(|v| v.to_string()).unwrap_or_default(),
                r.note
            );
        }
        out
    }

    /// Mean test Brier for a (method, size) aggregate row, when present.
    pub fn mean_brier(&self, method: &str, size: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.kind == CurveRowKind::Mean && r.method == method && r.size == size)
            .and_then(|r| r.brier)
    }
}

const CURVE_METHODS: [&str; 3] = ["none", "platt", "isotonic"];

/// Sweep calibration-set sizes: per trial, boost on a train split, carve a
/// stratified calibration set of each size from the remaining pool, fit
/// Platt and isotonic on it, and score test Brier on the rest of the pool.
///
/// Emits per-trial rows plus mean and standard-error aggregates per
/// (method, size); infeasible sizes produce one `skip` row with the reason.
pub fn run_learning_curve(d: &Dataset, cfg: &ExperimentConfig) -> Result<CurveReport> {
    cfg.validate()?;
    if cfg.calibration_sizes.is_empty() {
        return Err(config("no calibration sizes given"));
    }
    let t_max = *cfg.grid.last().expect("validated non-empty grid");
    let mut rows = Vec::new();
    // per (method, size) -> collected trial briers
    let mut collected: Vec<Vec<Vec<f64>>> =
        vec![vec![Vec::new(); cfg.calibration_sizes.len()]; CURVE_METHODS.len()];

    for trial in 0..cfg.trials {
        let trial_seed = derive_seed(cfg.seed, &[3, trial as u64]);
        let split = SplitSpec {
            train_fraction: cfg.train_fraction,
            calibration_size: 0,
            seed: trial_seed,
        };
        let (train, _, pool) = stratified_split(d, &split)?;
        let ensemble = boost_train(&train, &cfg.boost_config(t_max, cfg.loss))?;

        for (s_idx, &size) in cfg.calibration_sizes.iter().enumerate() {
            if size + 1 >= pool.n_rows() {
                if trial == 0 {
                    rows.push(CurveRow {
                        method: "all".to_string(),
                        size,
                        kind: CurveRowKind::Skip,
                        trial: None,
                        brier: None,
                        stderr: None,
                        note: format!("size {size} exceeds pool of {} rows", pool.n_rows()),
                    });
                }
                continue;
            }
            let take_seed = derive_seed(cfg.seed, &[4, trial as u64, size as u64]);
            let (cal_part, test_part) = stratified_take(&pool, size, take_seed)?;
            let f_cal = ensemble.normalized_scores(&cal_part)?;
            let f_test = ensemble.normalized_scores(&test_part)?;
            let cal_set = CalibrationSet::from_pairs(f_cal, cal_part.labels().to_vec())?;

            for (m_idx, method) in CURVE_METHODS.iter().enumerate() {
                let outcome: Result<f64> = match *method {
                    "none" => brier_score(&f_test, test_part.labels()),
                    "platt" => {
                        let c = platt_fit(&cal_set)?.calibrator;
                        let probs: Vec<f64> = f_test.iter().map(|&f| c.apply(f)).collect();
                        brier_score(&probs, test_part.labels())
                    }
                    "isotonic" => {
                        let c = pav_fit(&cal_set)?;
                        let probs: Vec<f64> = f_test.iter().map(|&f| c.apply(f)).collect();
                        brier_score(&probs, test_part.labels())
                    }
                    _ => unreachable!(),
                };
                match outcome {
                    Ok(b) => {
                        collected[m_idx][s_idx].push(b);
                        rows.push(CurveRow {
                            method: method.to_string(),
                            size,
                            kind: CurveRowKind::Trial,
                            trial: Some(trial),
                            brier: Some(b),
                            stderr: None,
                            note: String::new(),
                        });
                    }
                    Err(e) => rows.push(CurveRow {
                        method: method.to_string(),
                        size,
                        kind: CurveRowKind::Trial,
                        trial: Some(trial),
                        brier: None,
                        stderr: None,
                        note: format!("error:{}", e.kind()),
                    }),
                }
            }
        }
    }

    for (m_idx, method) in CURVE_METHODS.iter().enumerate() {
        for (s_idx, &size) in cfg.calibration_sizes.iter().enumerate() {
            let values = &collected[m_idx][s_idx];
            if values.is_empty() {
                continue;
            }
            let k = values.len() as f64;
            let mean = values.iter().sum::<f64>() / k;
            let stderr = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
                (var / k).sqrt()
            } else {
                0.0
            };
            rows.push(CurveRow {
                method: method.to_string(),
                size,
                kind: CurveRowKind::Mean,
                trial: None,
                brier: Some(mean),
                stderr: Some(stderr),
                note: String::new(),
            });
        }
    }

    Ok(CurveReport { rows })
}
