//! Calibration and discrimination metrics: Brier score, clipped
//! cross-entropy, exact rank-based ROC AUC, reliability diagrams and
//! prediction histograms.
//!
//! Bins over [0, 1] are left-open right-closed, `(b/n, (b+1)/n]`, with 0.0
//! folded into the first bin.

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error};
use crate::Result;

/// Default probability clip used before taking logs.
pub const DEFAULT_CLIP_EPS: f64 = 1e-6;

/// Default bin count for reliability diagrams.
pub const RELIABILITY_BINS: usize = 10;

/// Default bin count for prediction histograms.
pub const HISTOGRAM_BINS: usize = 20;

fn check_lengths(p: &[f64], y: &[u8]) -> Result<()> {
    if p.is_empty() {
        return Err(shape("metric inputs are empty"));
    }
    if p.len() != y.len() {
        return Err(shape(format!(
            "{} predictions vs {} labels",
            p.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Mean squared difference between predictions and {0,1} outcomes.
pub fn brier_score(p: &[f64], y: &[u8]) -> Result<f64> {
    check_lengths(p, y)?;
    let sum: f64 = p
        .iter()
        .zip(y)
        .map(|(&pi, &yi)| {
            let d = pi - f64::from(yi);
            d * d
        })
        .sum();
    Ok(sum / p.len() as f64)
}

/// Mean negative log-likelihood (natural log) after clipping every
/// prediction into `[clip_eps, 1 - clip_eps]`.
pub fn cross_entropy(p: &[f64], y: &[u8], clip_eps: f64) -> Result<f64> {
    check_lengths(p, y)?;
    if !(clip_eps > 0.0 && clip_eps < 0.5) {
        return Err(Error::Config {
            message: format!("clip_eps must be in (0, 0.5), got {clip_eps}"),
        });
    }
    let sum: f64 = p
        .iter()
        .zip(y)
        .map(|(&pi, &yi)| {
            let pc = pi.clamp(clip_eps, 1.0 - clip_eps);
            if yi == 1 {
                -pc.ln()
            } else {
                -(1.0 - pc).ln()
            }
        })
        .sum();
    Ok(sum / p.len() as f64)
}

/// Exact ROC AUC as the Mann-Whitney statistic
/// `P(score+ > score-) + 0.5 P(tie)`, computed from average ranks.
///
/// Invariant under strictly increasing score transforms, bit for bit.
pub fn roc_auc(scores: &[f64], y: &[u8]) -> Result<f64> {
    check_lengths(scores, y)?;
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric {
            message: "ROC AUC needs both classes".into(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap());

    // Average ranks over tie groups; ranks are 1-based.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1 ..= j
        for &idx in &order[i..j] {
            if y[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// One reliability bin over `(lower, upper]`; statistics are absent when the
/// bin is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_predicted: Option<f64>,
    pub fraction_positive: Option<f64>,
}

/// Equal-width reliability diagram over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityDiagram {
    pub bins: Vec<ReliabilityBin>,
}

/// Equal-width histogram of predicted values over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionHistogram {
    pub edges: Vec<f64>, // n_bins + 1 edges
    pub counts: Vec<usize>,
}

/// Index of the bin covering `p`: bin `b` covers `(b/n, (b+1)/n]` and bin 0
/// also includes 0.0.
fn bin_index(p: f64, n_bins: usize) -> usize {
    let idx = (p * n_bins as f64).ceil() as isize - 1;
    idx.clamp(0, n_bins as isize - 1) as usize
}

/// Bin predictions against outcomes: per-bin mean prediction and empirical
/// positive fraction.
pub fn reliability_diagram(p: &[f64], y: &[u8], n_bins: usize) -> Result<ReliabilityDiagram> {
    check_lengths(p, y)?;
    if n_bins < 2 {
        return Err(Error::Config { message: format!("n_bins must be >= 2, got {n_bins}") });
    }
    let mut counts = vec![0usize; n_bins];
    let mut pred_sums = vec![0.0f64; n_bins];
    let mut pos_counts = vec![0usize; n_bins];
    for (&pi, &yi) in p.iter().zip(y) {
        let b = bin_index(pi, n_bins);
        counts[b] += 1;
        pred_sums[b] += pi;
        pos_counts[b] += usize::from(yi == 1);
    }
    let bins = (0..n_bins)
        .map(|b| ReliabilityBin {
            lower: b as f64 / n_bins as f64,
            upper: (b + 1) as f64 / n_bins as f64,
            count: counts[b],
            mean_predicted: (counts[b] > 0).then(|| pred_sums[b] / counts[b] as f64),
            fraction_positive: (counts[b] > 0).then(|| pos_counts[b] as f64 / counts[b] as f64),
        })
        .collect();
    Ok(ReliabilityDiagram { bins })
}

/// Histogram of predictions with the same boundary rule as
/// [`reliability_diagram`].
pub fn prediction_histogram(p: &[f64], n_bins: usize) -> Result<PredictionHistogram> {
    if p.is_empty() {
        return Err(shape("metric inputs are empty"));
    }
    if n_bins < 2 {
        return Err(Error::Config { message: format!("n_bins must be >= 2, got {n_bins}") });
    }
    let mut counts = vec![0usize; n_bins];
    for &pi in p {
        counts[bin_index(pi, n_bins)] += 1;
    }
    let edges = (0..=n_bins).map(|b| b as f64 / n_bins as f64).collect();
    Ok(PredictionHistogram { edges, counts })
}

impl ReliabilityDiagram {
    /// CSV with header `lower,upper,count,mean_predicted,fraction_positive`;
    /// empty statistics serialize as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,count,mean_predicted,fraction_positive\n");
        for b in &self.bins {
            let mean = b.mean_predicted.map(|v| v.to_string()).unwrap_or_default();
            let frac = b.fraction_positive.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", b.lower, b.upper, b.count, mean, frac));
        }
        out
    }
}

impl PredictionHistogram {
    /// CSV with header `lower,upper,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,count\n");
        for (b, &count) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.edges[b], self.edges[b + 1], count));
        }
        out
    }
}
