//! Boosted ensembles of weak learners under exponential loss (classic
//! discrete AdaBoost) or log-loss weighting.
//!
//! The ensemble exposes two score views: the raw additive score
//! `F(x) = sum_t alpha_t h_t(x)` with `h_t in {-1,+1}`, and the normalized
//! vote share `f(x) = sum_t alpha_t h'_t(x) / sum_t alpha_t` with
//! `h' = (h+1)/2 in {0,1}`, so `F = (sum alpha) * (2 f - 1)`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{config, shape, training, Error};
use crate::weak::{self, ColumnOrder, WeakModel};
use crate::Result;

/// Default clamp applied to the per-round weighted error before computing
/// the stage weight, preventing infinite stage weights on separable data.
pub const DEFAULT_EPSILON_ERR: f64 = 1e-6;

/// Training loss. Exponential gives the classic AdaBoost reweighting;
/// log-loss recomputes example weights from the current ensemble score as
/// `w_i ∝ 1 / (1 + exp(y~_i F(x_i)))` before each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Exponential,
    LogLoss,
}

impl Loss {
    pub fn as_str(&self) -> &'static str {
        match self {
            Loss::Exponential => "exp",
            Loss::LogLoss => "log",
        }
    }
}

/// Base weak-learner family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseSpec {
    Stump,
    Tree { max_depth: usize },
}

impl BaseSpec {
    pub fn as_str(&self) -> String {
        match self {
            BaseSpec::Stump => "stump".to_string(),
            BaseSpec::Tree { max_depth } => format!("tree{max_depth}"),
        }
    }
}

/// Boosting configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub rounds: usize,
    pub loss: Loss,
    pub base: BaseSpec,
    /// Weighted-error clamp, in (0, 0.5).
    pub epsilon_err: f64,
}

impl BoostConfig {
    pub fn new(rounds: usize, loss: Loss, base: BaseSpec) -> BoostConfig {
        BoostConfig { rounds, loss, base, epsilon_err: DEFAULT_EPSILON_ERR }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(config("rounds must be >= 1"));
        }
        if !(self.epsilon_err > 0.0 && self.epsilon_err < 0.5) {
            return Err(config(format!(
                "epsilon_err must be in (0, 0.5), got {}",
                self.epsilon_err
            )));
        }
        if let BaseSpec::Tree { max_depth } = self.base {
            if max_depth == 0 {
                return Err(config("tree max_depth must be >= 1"));
            }
        }
        Ok(())
    }
}

/// Why training stopped before reaching the configured round count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarlyStop {
    /// A round reached zero weighted error; the stage was kept (with the
    /// clamped stage weight) and training ended.
    PerfectFit,
    /// The best available learner was the degenerate majority fallback with
    /// weighted error >= 0.5; the stage was discarded.
    DegenerateWeakLearner,
}

/// One boosting stage: a weak model and its non-negative stage weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub model: WeakModel,
    pub alpha: f64,
}

/// Trained boosted ensemble. Stage order is training order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub stages: Vec<Stage>,
    pub loss: Loss,
    pub base: BaseSpec,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<EarlyStop>,
}

/// Stage weight for a clamped weighted error: `0.5 * ln((1 - eps) / eps)`.
pub fn stage_weight(eps: f64) -> f64 {
    0.5 * ((1.0 - eps) / eps).ln()
}

/// Train a boosted ensemble.
///
/// Weights start uniform; each round fits a weak learner, computes its
/// weighted error, clamps it into `[epsilon_err, 1 - epsilon_err]` and adds
/// the stage. Exponential loss multiplies weights by
/// `exp(-alpha_t y~_i h_t(x_i))` and renormalizes; log-loss recomputes them
/// from the accumulated score before each fit. Training ends early on a
/// perfect round (the stage is kept) or when only the degenerate majority
/// learner remains with error >= 0.5 (the stage is dropped).
pub fn boost_train(d: &Dataset, cfg: &BoostConfig) -> Result<BoostedEnsemble> {
    cfg.validate()?;
    if !d.has_both_classes() {
        return Err(training("dataset must contain both classes"));
    }
    let n = d.n_rows();
    let order = ColumnOrder::new(d);
    let mut stages: Vec<Stage> = Vec::new();
    let mut early_stop = None;

    // Exponential-loss weights evolve multiplicatively; log-loss weights are
    // recomputed from these accumulated scores each round.
    let mut weights = vec![1.0 / n as f64; n];
    let mut scores = vec![0.0f64; n];

    for _round in 0..cfg.rounds {
        if cfg.loss == Loss::LogLoss {
            for i in 0..n {
                weights[i] = logistic_weight(d.signed_label(i) * scores[i]);
            }
            normalize(&mut weights);
        }

        let model = match cfg.base {
            BaseSpec::Stump => WeakModel::Stump(weak::train_stump_with(d, &order, &weights)?),
            BaseSpec::Tree { max_depth } => {
                WeakModel::Tree(weak::train_tree_with(d, &order, &weights, max_depth)?)
            }
        };
        let eps_raw = weak::weighted_error(&model, d, &weights);

        if model.is_degenerate() && eps_raw >= 0.5 {
            early_stop = Some(EarlyStop::DegenerateWeakLearner);
            break;
        }

        let eps = eps_raw.clamp(cfg.epsilon_err, 1.0 - cfg.epsilon_err);
        let alpha = stage_weight(eps);
        debug_assert!(alpha >= 0.0, "stage weight must be non-negative, got {alpha}");

        for i in 0..n {
            scores[i] += alpha * f64::from(model.vote_unchecked(d.row(i)));
        }
        if cfg.loss == Loss::Exponential {
            for i in 0..n {
                let vote = f64::from(model.vote_unchecked(d.row(i)));
                weights[i] *= (-alpha * d.signed_label(i) * vote).exp();
            }
            normalize(&mut weights);
        }

        stages.push(Stage { model, alpha });
        if eps_raw == 0.0 {
            early_stop = Some(EarlyStop::PerfectFit);
            break;
        }
    }

    if stages.is_empty() {
        return Err(training(
            "no informative weak learner found on the first round",
        ));
    }
    Ok(BoostedEnsemble { stages, loss: cfg.loss, base: cfg.base, width: d.n_features(), early_stop })
}

/// Log-loss example weight for margin `m = y~ F(x)`: `1 / (1 + exp(m))`,
/// evaluated stably for large |m|.
fn logistic_weight(margin: f64) -> f64 {
    if margin >= 0.0 {
        let e = (-margin).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + margin.exp())
    }
}

fn normalize(w: &mut [f64]) {
    let sum: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= sum;
    }
}

impl BoostedEnsemble {
    pub fn rounds(&self) -> usize {
        self.stages.len()
    }

    pub fn alpha_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.alpha).sum()
    }

    /// An ensemble whose stage weights sum to zero carries no information;
    /// its normalized score is pinned at 0.5.
    pub fn is_uninformative(&self) -> bool {
        self.alpha_sum() == 0.0
    }

    fn check_width(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.width {
            return Err(shape(format!(
                "input has {} features, ensemble expects {}",
                x.len(),
                self.width
            )));
        }
        Ok(())
    }

    /// Raw additive score `F(x)`, in `[-S, S]` for `S = sum of stage weights`.
    pub fn raw_score(&self, x: &[f64]) -> Result<f64> {
        self.check_width(x)?;
        Ok(self.raw_score_unchecked(x))
    }

    pub(crate) fn raw_score_unchecked(&self, x: &[f64]) -> f64 {
        self.stages
            .iter()
            .map(|s| s.alpha * f64::from(s.model.vote_unchecked(x)))
            .sum()
    }

    /// Normalized vote share `f(x) in [0, 1]`. A zero stage-weight sum yields
    /// the uninformative value 0.5 (see [`BoostedEnsemble::is_uninformative`]).
    pub fn normalized_score(&self, x: &[f64]) -> Result<f64> {
        self.check_width(x)?;
        Ok(self.normalized_score_unchecked(x))
    }

    pub(crate) fn normalized_score_unchecked(&self, x: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for s in &self.stages {
            let h_prime = f64::from(s.model.vote_unchecked(x) == 1);
            num += s.alpha * h_prime;
            den += s.alpha;
        }
        if den == 0.0 {
            0.5
        } else {
            num / den
        }
    }

    /// Normalized scores over a dataset.
    pub fn normalized_scores(&self, d: &Dataset) -> Result<Vec<f64>> {
        if d.n_features() != self.width {
            return Err(shape(format!(
                "dataset has {} features, ensemble expects {}",
                d.n_features(),
                self.width
            )));
        }
        Ok((0..d.n_rows()).map(|i| self.normalized_score_unchecked(d.row(i))).collect())
    }

    /// Normalized scores of every stage-count prefix in `stages_wanted`,
    /// one row per requested prefix, computed in a single pass of prefix
    /// sums per example.
    pub fn staged_normalized_scores(
        &self,
        d: &Dataset,
        stages_wanted: &[usize],
    ) -> Result<Vec<Vec<f64>>> {
        self.staged_scores_impl(d, stages_wanted, false)
    }

    /// Raw scores of every stage-count prefix in `stages_wanted`.
    pub fn staged_raw_scores(&self, d: &Dataset, stages_wanted: &[usize]) -> Result<Vec<Vec<f64>>> {
        self.staged_scores_impl(d, stages_wanted, true)
    }

    fn staged_scores_impl(
        &self,
        d: &Dataset,
        stages_wanted: &[usize],
        raw: bool,
    ) -> Result<Vec<Vec<f64>>> {
        if d.n_features() != self.width {
            return Err(shape(format!(
                "dataset has {} features, ensemble expects {}",
                d.n_features(),
                self.width
            )));
        }
        for &k in stages_wanted {
            if k > self.stages.len() {
                return Err(Error::Range {
                    message: format!(
                        "requested stage {k} beyond trained count {}",
                        self.stages.len()
                    ),
                });
            }
        }
        let max_stage = stages_wanted.iter().copied().max().unwrap_or(0);
        let mut out = vec![vec![0.0f64; d.n_rows()]; stages_wanted.len()];
        for i in 0..d.n_rows() {
            let x = d.row(i);
            let mut num = 0.0f64; // raw: sum alpha*h ; normalized: sum alpha*h'
            let mut den = 0.0f64;
            let mut cursor = 0usize;
            // Walk stages once, emitting at each requested prefix length.
            let emit = |stage_count: usize, num: f64, den: f64, out: &mut Vec<Vec<f64>>| {
                for (row, &want) in stages_wanted.iter().enumerate() {
                    if want == stage_count {
                        out[row][i] = if raw {
                            num
                        } else if den == 0.0 {
                            0.5
                        } else {
                            num / den
                        };
                    }
                }
            };
            emit(0, num, den, &mut out);
            while cursor < max_stage {
                let s = &self.stages[cursor];
                let vote = s.model.vote_unchecked(x);
                if raw {
                    num += s.alpha * f64::from(vote);
                } else {
                    num += s.alpha * f64::from(vote == 1);
                    den += s.alpha;
                }
                cursor += 1;
                emit(cursor, num, den, &mut out);
            }
        }
        Ok(out)
    }

    /// Cumulative stage-weight sums: entry `k` is `sum of the first k alphas`
    /// (entry 0 is 0).
    pub fn prefix_alpha_sums(&self) -> Vec<f64> {
        let mut sums = Vec::with_capacity(self.stages.len() + 1);
        let mut acc = 0.0;
        sums.push(acc);
        for s in &self.stages {
            acc += s.alpha;
            sums.push(acc);
        }
        sums
    }
}
