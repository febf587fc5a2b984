//! Weak learners: one-split stumps and depth-limited decision trees, trained
//! on weighted data and voting in {-1, +1}.
//!
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values; the comparison rule is "go left iff x[j] <= threshold". All
//! tie-breaks are fixed (lowest feature index, then lowest threshold) so
//! training is bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::shape;
use crate::Result;

/// Per-example training weights. Kept strictly positive and normalized to
/// sum 1 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(n: usize) -> WeightVector {
        WeightVector { weights: vec![1.0 / n as f64; n] }
    }

    /// Normalize raw positive weights to sum 1.
    pub fn from_raw(raw: Vec<f64>) -> Result<WeightVector> {
        if raw.is_empty() {
            return Err(shape("weight vector is empty"));
        }
        if raw.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(shape("weights must be finite and strictly positive"));
        }
        let sum: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / sum).collect();
        Ok(WeightVector { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// One-split decision stump. `degenerate` marks the no-informative-split
/// fallback where both sides vote the weighted majority class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left_vote: i8,
    pub right_vote: i8,
    #[serde(default)]
    pub degenerate: bool,
    pub width: usize,
}

impl Stump {
    fn vote(&self, x: &[f64]) -> i8 {
        if x[self.feature] <= self.threshold {
            self.left_vote
        } else {
            self.right_vote
        }
    }
}

/// Node of a [`Tree`], stored in an arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { vote: i8 },
}

/// Depth-limited binary decision tree with {-1, +1} leaf votes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
    pub width: usize,
}

impl Tree {
    fn vote(&self, x: &[f64]) -> i8 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { vote } => return *vote,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// A single-leaf tree carries no split and is the degenerate fallback.
    pub fn is_degenerate(&self) -> bool {
        self.nodes.len() == 1
    }
}

/// Either weak learner kind, as stored in a boosted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakModel {
    Stump(Stump),
    Tree(Tree),
}

impl WeakModel {
    pub fn width(&self) -> usize {
        match self {
            WeakModel::Stump(s) => s.width,
            WeakModel::Tree(t) => t.width,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            WeakModel::Stump(s) => s.degenerate,
            WeakModel::Tree(t) => t.is_degenerate(),
        }
    }

    /// Vote without width checking; callers validate width once per batch.
    pub(crate) fn vote_unchecked(&self, x: &[f64]) -> i8 {
        match self {
            WeakModel::Stump(s) => s.vote(x),
            WeakModel::Tree(t) => t.vote(x),
        }
    }

    /// Deterministic {-1, +1} vote for a feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        if x.len() != self.width() {
            return Err(shape(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.width()
            )));
        }
        Ok(self.vote_unchecked(x))
    }
}

/// Feature columns presorted by value (ties by row index). Built once per
/// training run and shared across boosting rounds; weight updates never
/// change value order.
pub struct ColumnOrder {
    per_feature: Vec<Vec<u32>>,
}

impl ColumnOrder {
    pub fn new(d: &Dataset) -> ColumnOrder {
        let per_feature = (0..d.n_features())
            .map(|j| {
                let mut idx: Vec<u32> = (0..d.n_rows() as u32).collect();
                idx.sort_by(|&a, &b| {
                    d.row(a as usize)[j]
                        .partial_cmp(&d.row(b as usize)[j])
                        .unwrap()
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        ColumnOrder { per_feature }
    }
}

fn majority_vote(d: &Dataset, rows: &[f64], members: Option<&[bool]>) -> i8 {
    // rows = weights; members filters to the node when given. Ties vote +1.
    let mut signed = 0.0f64;
    for i in 0..d.n_rows() {
        if members.map_or(true, |m| m[i]) {
            signed += rows[i] * d.signed_label(i);
        }
    }
    if signed >= 0.0 {
        1
    } else {
        -1
    }
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Sweep one feature over a node, invoking `consider` at every midpoint
/// between distinct consecutive values with the weight mass below the
/// threshold per class.
fn sweep_feature<F: FnMut(f64, f64, f64)>(
    d: &Dataset,
    order: &[u32],
    w: &[f64],
    members: Option<&[bool]>,
    feature: usize,
    mut consider: F,
) {
    let mut below_pos = 0.0f64;
    let mut below_neg = 0.0f64;
    let mut prev_value: Option<f64> = None;
    for &raw in order {
        let i = raw as usize;
        if let Some(m) = members {
            if !m[i] {
                continue;
            }
        }
        let v = d.row(i)[feature];
        if let Some(pv) = prev_value {
            if v > pv {
                consider((pv + v) / 2.0, below_pos, below_neg);
            }
        }
        if d.label(i) == 1 {
            below_pos += w[i];
        } else {
            below_neg += w[i];
        }
        prev_value = Some(v);
    }
}

/// Train the stump minimizing weighted 0/1 error over all candidate splits
/// and both vote orientations.
///
/// When every feature is constant the returned stump is degenerate: both
/// sides vote the weighted majority class.
pub fn train_stump(d: &Dataset, w: &WeightVector) -> Result<Stump> {
    let order = ColumnOrder::new(d);
    train_stump_with(d, &order, w.as_slice())
}

pub(crate) fn train_stump_with(d: &Dataset, order: &ColumnOrder, w: &[f64]) -> Result<Stump> {
    if w.len() != d.n_rows() {
        return Err(shape(format!(
            "{} weights for {} rows",
            w.len(),
            d.n_rows()
        )));
    }
    let total_neg: f64 = (0..d.n_rows()).filter(|&i| d.label(i) == 0).map(|i| w[i]).sum();

    let mut best: Option<(SplitCandidate, i8)> = None;
    for feature in 0..d.n_features() {
        sweep_feature(d, &order.per_feature[feature], w, None, feature, |t, bp, bn| {
            // left -1 / right +1 errs on positives below and negatives above
            let err_neg_left = bp + (total_neg - bn);
            for (err, left_vote) in [(err_neg_left, -1i8), (1.0 - err_neg_left, 1i8)] {
                let better = match &best {
                    None => true,
                    Some((cand, _)) => err < cand.score,
                };
                if better {
                    best = Some((SplitCandidate { feature, threshold: t, score: err }, left_vote));
                }
            }
        });
    }

    match best {
        Some((cand, left_vote)) => Ok(Stump {
            feature: cand.feature,
            threshold: cand.threshold,
            left_vote,
            right_vote: -left_vote,
            degenerate: false,
            width: d.n_features(),
        }),
        None => {
            let vote = majority_vote(d, w, None);
            Ok(Stump {
                feature: 0,
                threshold: 0.0,
                left_vote: vote,
                right_vote: vote,
                degenerate: true,
                width: d.n_features(),
            })
        }
    }
}

/// Train a depth-limited tree by greedy weighted-Gini induction.
///
/// Splits are accepted when the best candidate does not increase weighted
/// child impurity, so tied splits (as in XOR at the root) still recurse;
/// leaves vote the sign of the weighted label sum. An unsplittable root
/// yields a single-leaf majority tree.
pub fn train_tree(d: &Dataset, w: &WeightVector, max_depth: usize) -> Result<Tree> {
    if max_depth == 0 {
        return Err(shape("max_depth must be >= 1"));
    }
    let order = ColumnOrder::new(d);
    train_tree_with(d, &order, w.as_slice(), max_depth)
}

pub(crate) fn train_tree_with(
    d: &Dataset,
    order: &ColumnOrder,
    w: &[f64],
    max_depth: usize,
) -> Result<Tree> {
    if w.len() != d.n_rows() {
        return Err(shape(format!("{} weights for {} rows", w.len(), d.n_rows())));
    }
    let members = vec![true; d.n_rows()];
    let mut nodes = Vec::new();
    grow(d, order, w, &members, max_depth, &mut nodes);
    Ok(Tree { nodes, max_depth, width: d.n_features() })
}

/// Recursively grow a node over `members`; returns its index in `nodes`.
fn grow(
    d: &Dataset,
    order: &ColumnOrder,
    w: &[f64],
    members: &[bool],
    depth_left: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let mut node_pos = 0.0f64;
    let mut node_neg = 0.0f64;
    for i in 0..d.n_rows() {
        if members[i] {
            if d.label(i) == 1 {
                node_pos += w[i];
            } else {
                node_neg += w[i];
            }
        }
    }
    let leaf_vote = if node_pos >= node_neg { 1i8 } else { -1i8 };
    let pure = node_pos == 0.0 || node_neg == 0.0;

    let mut best: Option<SplitCandidate> = None;
    if depth_left > 0 && !pure {
        let parent_impurity = gini_mass(node_pos, node_neg);
        for feature in 0..d.n_features() {
            sweep_feature(d, &order.per_feature[feature], w, Some(members), feature, |t, bp, bn| {
                let child = gini_mass(bp, bn) + gini_mass(node_pos - bp, node_neg - bn);
                let acceptable = child <= parent_impurity;
                let better = match &best {
                    None => acceptable,
                    Some(cand) => acceptable && child < cand.score,
                };
                if better {
                    best = Some(SplitCandidate { feature, threshold: t, score: child });
                }
            });
        }
    }

    match best {
        None => {
            nodes.push(TreeNode::Leaf { vote: leaf_vote });
            nodes.len() - 1
        }
        Some(cand) => {
            let mut left_members = vec![false; d.n_rows()];
            let mut right_members = vec![false; d.n_rows()];
            for i in 0..d.n_rows() {
                if members[i] {
                    if d.row(i)[cand.feature] <= cand.threshold {
                        left_members[i] = true;
                    } else {
                        right_members[i] = true;
                    }
                }
            }
            // Reserve this node's slot before growing children.
            nodes.push(TreeNode::Leaf { vote: leaf_vote });
            let me = nodes.len() - 1;
            let left = grow(d, order, w, &left_members, depth_left - 1, nodes);
            let right = grow(d, order, w, &right_members, depth_left - 1, nodes);
            nodes[me] = TreeNode::Split {
                feature: cand.feature,
                threshold: cand.threshold,
                left,
                right,
            };
            me
        }
    }
}

/// Mass-weighted Gini contribution of a child: 2 * pos * neg / (pos + neg).
fn gini_mass(pos: f64, neg: f64) -> f64 {
    let total = pos + neg;
    if total <= 0.0 {
        0.0
    } else {
        2.0 * pos * neg / total
    }
}

/// Weighted 0/1 error of a model's votes against the signed labels.
pub fn weighted_error(model: &WeakModel, d: &Dataset, w: &[f64]) -> f64 {
    let mut err = 0.0;
    for i in 0..d.n_rows() {
        if f64::from(model.vote_unchecked(d.row(i))) != d.signed_label(i) {
            err += w[i];
        }
    }
    err
}
