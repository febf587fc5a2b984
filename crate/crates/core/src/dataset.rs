//! Datasets for binary classification: loading, label binarization,
//! stratified splitting and stratified k-fold partitioning.
//!
//! A [`Dataset`] is an immutable dense table of real-valued features with
//! labels in {0, 1}. Splits and folds are driven by a seeded Fisher–Yates
//! shuffle (ChaCha8), so identical `(data, seed)` inputs always produce
//! identical partitions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{config, shape, Error};
use crate::rng;
use crate::Result;

/// Input file format for [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Comma-separated with a header row; decimal point `.`.
    Csv,
    /// `<label> <index>:<value> ...` with 1-based ascending indices.
    Libsvm,
}

/// Which column holds the label (CSV only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Match against the header row.
    Name(String),
    /// 0-based column index.
    Index(usize),
}

/// How raw label symbols map to {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelPolicy {
    /// Exactly two distinct raw labels must occur; the numerically larger one
    /// (or lexicographically larger, when either side does not parse as a
    /// number) maps to 1.
    Auto,
    /// Labels in the set map to 1, everything else to 0. Allows more than
    /// two raw classes.
    Positive(Vec<String>),
    /// The most frequent class maps to 1; ties go to the lexicographically
    /// smaller class. Allows more than two raw classes.
    LargestClassPositive,
}

/// Options for [`load_dataset`] beyond path and format.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label_column: LabelColumn,
    pub label_policy: LabelPolicy,
    /// Overrides the inferred feature count (LIBSVM only).
    pub n_features: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            label_column: LabelColumn::Index(0),
            label_policy: LabelPolicy::Auto,
            n_features: None,
        }
    }
}

/// Immutable table of feature vectors with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>, // row-major, n_rows * n_features
    n_features: usize,
    labels: Vec<u8>,
    name: String,
}

impl Dataset {
    /// Build a dataset from row-major features and {0,1} labels, validating
    /// the type invariants.
    pub fn from_parts(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<u8>,
        name: impl Into<String>,
    ) -> Result<Dataset> {
        if labels.is_empty() {
            return Err(shape("dataset must contain at least one row"));
        }
        if n_features == 0 {
            return Err(shape("dataset must have at least one feature"));
        }
        if features.len() != labels.len() * n_features {
            return Err(shape(format!(
                "feature buffer holds {} values, expected {} rows x {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(shape(format!("labels must be 0 or 1, found {bad}")));
        }
        if let Some(bad) = features.iter().find(|v| !v.is_finite()) {
            return Err(shape(format!("non-finite feature value {bad}")));
        }
        Ok(Dataset { features, n_features, labels, name: name.into() })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Label in {0, 1}.
    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Label in {-1, +1}: the `2y - 1` view used by the boosting update.
    pub fn signed_label(&self, i: usize) -> f64 {
        2.0 * f64::from(self.labels[i]) - 1.0
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn negatives(&self) -> usize {
        self.n_rows() - self.positives()
    }

    pub fn has_both_classes(&self) -> bool {
        self.positives() > 0 && self.negatives() > 0
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset(&self, rows: &[usize], name: impl Into<String>) -> Result<Dataset> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n_rows() {
                return Err(shape(format!("row {r} out of range ({} rows)", self.n_rows())));
            }
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Dataset::from_parts(features, self.n_features, labels, name)
    }

    /// Write the dataset as a header-first CSV (features f0..fk, label last).
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for j in 0..self.n_features {
            let _ = write!(out, "f{j},");
        }
        out.push_str("label\n");
        for i in 0..self.n_rows() {
            for v in self.row(i) {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{}", self.labels[i]);
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Requested three-way split: an absolute calibration holdout plus a
/// train fraction of the whole, with the remainder as test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// Fraction of all rows that goes to the train part, in (0, 1).
    pub train_fraction: f64,
    /// Absolute number of rows held out in the middle (calibration) part.
    pub calibration_size: usize,
    pub seed: u64,
}

/// Assignment of every row to one of `fold_count` stratified folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPartition {
    fold_count: usize,
    assignment: Vec<usize>,
}

impl FoldPartition {
    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Rows in fold `k`, ascending.
    pub fn fold_rows(&self, k: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Rows outside fold `k`, ascending.
    pub fn complement_rows(&self, k: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != k)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Load a dataset from disk.
///
/// Labels are mapped to {0, 1} according to `options.label_policy`; missing
/// values are rejected. CSV expects a header row; LIBSVM width defaults to
/// the maximum observed index.
pub fn load_dataset(path: &Path, format: DataFormat, options: &LoadOptions) -> Result<Dataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let text = std::fs::read_to_string(path)?;
    match format {
        DataFormat::Csv => parse_csv(&text, options, name),
        DataFormat::Libsvm => parse_libsvm(&text, options, name),
    }
}

fn parse_csv(text: &str, options: &LoadOptions, name: String) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Format { line: 1, message: e.to_string() })?
        .clone();
    let label_idx = match &options.label_column {
        LabelColumn::Index(i) => {
            if *i >= headers.len() {
                return Err(config(format!(
                    "label column index {i} out of range ({} columns)",
                    headers.len()
                )));
            }
            *i
        }
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| config(format!("label column {n:?} not found in header")))?,
    };

    let width = headers.len() - 1;
    if width == 0 {
        return Err(shape("csv has no feature columns"));
    }
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (rec_no, record) in reader.records().enumerate() {
        let line = rec_no + 2; // header is line 1
        let record = record.map_err(|e| Error::Format { line, message: e.to_string() })?;
        if record.len() != headers.len() {
            return Err(shape(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            if col == label_idx {
                if field.is_empty() {
                    return Err(Error::Format { line, message: "empty label".to_string() });
                }
                raw_labels.push(field.to_string());
            } else {
                let v: f64 = field.trim().parse().map_err(|_| Error::Format {
                    line,
                    message: format!("cannot parse feature value {field:?} in column {col}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Format {
                        line,
                        message: format!("non-finite feature value in column {col}"),
                    });
                }
                features.push(v);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(shape("csv contains no data rows"));
    }
    let labels = map_labels(&raw_labels, &options.label_policy)?;
    Dataset::from_parts(features, width, labels, name)
}

fn parse_libsvm(text: &str, options: &LoadOptions, name: String) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels = Vec::new();
    let mut max_index = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        let line_num = line_no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label = parts
            .next()
            .ok_or_else(|| Error::Format { line: line_num, message: "missing label".into() })?;
        raw_labels.push(label.to_string());
        let mut row = Vec::new();
        let mut prev_index = 0usize;
        for token in parts {
            let (idx_str, val_str) = token.split_once(':').ok_or_else(|| Error::Format {
                line: line_num,
                message: format!("malformed feature token {token:?}"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| Error::Format {
                line: line_num,
                message: format!("bad feature index {idx_str:?}"),
            })?;
            let val: f64 = val_str.parse().map_err(|_| Error::Format {
                line: line_num,
                message: format!("bad feature value {val_str:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Format {
                    line: line_num,
                    message: "feature indices are 1-based".into(),
                });
            }
            if idx <= prev_index {
                return Err(Error::Format {
                    line: line_num,
                    message: format!("feature indices must be ascending (index {idx})"),
                });
            }
            prev_index = idx;
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(shape("libsvm file contains no data rows"));
    }
    let width = options.n_features.unwrap_or(max_index);
    if width == 0 {
        return Err(shape("no feature indices observed and no width override given"));
    }
    if max_index > width {
        return Err(shape(format!(
            "feature index {max_index} exceeds declared width {width}"
        )));
    }
    let mut features = vec![0.0; rows.len() * width];
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[r * width + j] = v;
        }
    }
    let labels = map_labels(&raw_labels, &options.label_policy)?;
    Dataset::from_parts(features, width, labels, name)
}

/// Map raw label symbols to {0, 1} under `policy`.
///
/// `Auto` requires exactly two distinct symbols; the numerically larger one
/// maps to 1 when both parse as numbers, otherwise the lexicographically
/// larger one does.
pub fn map_labels(raw: &[String], policy: &LabelPolicy) -> Result<Vec<u8>> {
    match policy {
        LabelPolicy::Auto => {
            let mut distinct: Vec<&str> = Vec::new();
            for l in raw {
                if !distinct.contains(&l.as_str()) {
                    distinct.push(l);
                }
            }
            if distinct.len() != 2 {
                return Err(Error::LabelCardinality {
                    message: format!(
                        "expected exactly 2 distinct labels, found {}: {:?}",
                        distinct.len(),
                        distinct
                    ),
                });
            }
            let positive = match (distinct[0].parse::<f64>(), distinct[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    if a > b {
                        distinct[0]
                    } else {
                        distinct[1]
                    }
                }
                _ => {
                    if distinct[0] > distinct[1] {
                        distinct[0]
                    } else {
                        distinct[1]
                    }
                }
            };
            Ok(raw.iter().map(|l| u8::from(l == positive)).collect())
        }
        LabelPolicy::Positive(set) => binarize_multiclass(raw, &BinarizePolicy::Positive(set.clone())),
        LabelPolicy::LargestClassPositive => {
            binarize_multiclass(raw, &BinarizePolicy::LargestClassPositive)
        }
    }
}

/// Policy for [`binarize_multiclass`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinarizePolicy {
    /// The modal class maps to 1; ties break toward the lexicographically
    /// smaller class.
    LargestClassPositive,
    /// Every label in the set maps to 1.
    Positive(Vec<String>),
}

/// Collapse a multiclass label vector to {0, 1}.
pub fn binarize_multiclass(raw: &[String], policy: &BinarizePolicy) -> Result<Vec<u8>> {
    if raw.is_empty() {
        return Err(shape("empty label vector"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in raw {
        *counts.entry(l.as_str()).or_insert(0) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::LabelCardinality {
            message: "need at least 2 distinct raw labels".into(),
        });
    }
    match policy {
        BinarizePolicy::LargestClassPositive => {
            // BTreeMap iterates keys ascending, so on count ties the
            // lexicographically smaller class is kept.
            let mut best: Option<(&str, usize)> = None;
            for (label, count) in &counts {
                if best.map_or(true, |(_, c)| *count > c) {
                    best = Some((label, *count));
                }
            }
            let positive = best.expect("non-empty counts").0;
            Ok(raw.iter().map(|l| u8::from(l == positive)).collect())
        }
        BinarizePolicy::Positive(set) => {
            if set.is_empty() {
                return Err(config("positive label set is empty"));
            }
            if !set.iter().any(|s| counts.contains_key(s.as_str())) {
                return Err(config(format!(
                    "positive set {set:?} is disjoint from observed labels"
                )));
            }
            Ok(raw.iter().map(|l| u8::from(set.contains(l))).collect())
        }
    }
}

/// Apportion `total` items across parts with the given sizes, proportionally
/// to `sizes`, by largest remainder. Ties go to the earliest part.
fn largest_remainder(sizes: &[usize], total: usize, population: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(sizes.len());
    let mut assigned = 0usize;
    for (p, &s) in sizes.iter().enumerate() {
        let quota = s as f64 * total as f64 / population as f64;
        let floor = quota.floor() as usize;
        counts.push(floor);
        assigned += floor;
        remainders.push((quota - floor as f64, p));
    }
    // Sort by remainder descending, then part index ascending.
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut left = total - assigned;
    for &(_, p) in &remainders {
        if left == 0 {
            break;
        }
        // Never overfill a part beyond its size.
        if counts[p] < sizes[p] {
            counts[p] += 1;
            left -= 1;
        }
    }
    // Rare leftover when some parts hit their size cap: sweep in part order.
    for p in 0..sizes.len() {
        while left > 0 && counts[p] < sizes[p] {
            counts[p] += 1;
            left -= 1;
        }
    }
    counts
}

/// Partition row indices into parts of the requested sizes, stratified by
/// class, shuffled by `seed`. Returned parts hold ascending row indices.
fn stratified_parts(labels: &[u8], sizes: &[usize], seed: u64) -> Result<Vec<Vec<usize>>> {
    let n: usize = labels.len();
    if sizes.iter().sum::<usize>() != n {
        return Err(shape("part sizes must sum to the row count"));
    }
    let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| labels[i] == 0).collect();
    let mut rng = rng::stream(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let pos_counts = largest_remainder(sizes, pos.len(), n);
    let mut parts: Vec<Vec<usize>> = Vec::with_capacity(sizes.len());
    let mut pos_cursor = 0usize;
    let mut neg_cursor = 0usize;
    for (p, &s) in sizes.iter().enumerate() {
        let np = pos_counts[p];
        let nn = s - np;
        if neg_cursor + nn > neg.len() {
            return Err(Error::Stratification {
                message: "negative class exhausted during apportionment".into(),
            });
        }
        let mut part: Vec<usize> = Vec::with_capacity(s);
        part.extend_from_slice(&pos[pos_cursor..pos_cursor + np]);
        part.extend_from_slice(&neg[neg_cursor..neg_cursor + nn]);
        pos_cursor += np;
        neg_cursor += nn;
        part.sort_unstable();
        parts.push(part);
    }
    #[cfg(debug_assertions)]
    {
        // Parts must be pairwise disjoint and cover every row.
        let mut seen = vec![false; n];
        for part in &parts {
            for &i in part {
                debug_assert!(!seen[i], "row {i} assigned to two parts");
                seen[i] = true;
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "some row left unassigned");
    }
    // Every nonempty part must contain both classes.
    for (p, part) in parts.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        let has_pos = part.iter().any(|&i| labels[i] == 1);
        let has_neg = part.iter().any(|&i| labels[i] == 0);
        if !has_pos || !has_neg {
            return Err(Error::Stratification {
                message: format!("part {p} (size {}) is missing a class", part.len()),
            });
        }
    }
    Ok(parts)
}

/// Deterministic stratified three-way split into (train, calibration, test).
///
/// Class proportions in every part stay within one example of the global
/// proportion; parts are disjoint and cover every row.
pub fn stratified_split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(config(format!(
            "train_fraction must be in (0,1), got {}",
            spec.train_fraction
        )));
    }
    if !d.has_both_classes() {
        return Err(Error::Stratification { message: "dataset has a single class".into() });
    }
    let n = d.n_rows();
    let train_count = (spec.train_fraction * n as f64).round() as usize;
    if train_count == 0 {
        return Err(Error::Infeasible { message: "train part would be empty".into() });
    }
    if train_count + spec.calibration_size > n {
        return Err(Error::Infeasible {
            message: format!(
                "train ({train_count}) + calibration ({}) exceeds {n} rows",
                spec.calibration_size
            ),
        });
    }
    let test_count = n - train_count - spec.calibration_size;
    let sizes = [train_count, spec.calibration_size, test_count];
    let parts = stratified_parts(d.labels(), &sizes, spec.seed)?;
    let train = d.subset(&parts[0], format!("{}.train", d.name()))?;
    let calibration = if parts[1].is_empty() {
        empty_like(d, format!("{}.calibration", d.name()))
    } else {
        d.subset(&parts[1], format!("{}.calibration", d.name()))?
    };
    let test = if parts[2].is_empty() {
        empty_like(d, format!("{}.test", d.name()))
    } else {
        d.subset(&parts[2], format!("{}.test", d.name()))?
    };
    Ok((train, calibration, test))
}

/// Stratified removal of exactly `count` rows: returns (taken, rest).
pub fn stratified_take(d: &Dataset, count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if count == 0 || count >= d.n_rows() {
        return Err(Error::Infeasible {
            message: format!("cannot take {count} of {} rows", d.n_rows()),
        });
    }
    if !d.has_both_classes() {
        return Err(Error::Stratification { message: "dataset has a single class".into() });
    }
    let sizes = [count, d.n_rows() - count];
    let parts = stratified_parts(d.labels(), &sizes, seed)?;
    let taken = d.subset(&parts[0], format!("{}.taken", d.name()))?;
    let rest = d.subset(&parts[1], format!("{}.rest", d.name()))?;
    Ok((taken, rest))
}

// Zero-row "dataset" placeholder used for empty split parts. Bypasses the
// row-count invariant on purpose; callers treat empty parts as absent.
fn empty_like(d: &Dataset, name: String) -> Dataset {
    Dataset {
        features: Vec::new(),
        n_features: d.n_features(),
        labels: Vec::new(),
        name,
    }
}

/// Stratified k-fold assignment, deterministic in `(d, fold_count, seed)`.
///
/// Fold sizes differ by at most one, overall and per class. Each class is
/// dealt round-robin from a rotating start offset so remainders spread
/// across folds. When a class has fewer than `fold_count` examples (the
/// leave-one-out limit), folds degrade to a plain seeded deal with sizes
/// still differing by at most one.
pub fn kfold_partition(d: &Dataset, fold_count: usize, seed: u64) -> Result<FoldPartition> {
    let n = d.n_rows();
    if fold_count < 2 {
        return Err(config(format!("fold count must be >= 2, got {fold_count}")));
    }
    if fold_count > n {
        return Err(Error::Infeasible {
            message: format!("fold count {fold_count} exceeds {n} rows"),
        });
    }
    let mut rng = rng::stream(seed);
    let mut assignment = vec![0usize; n];
    let stratified = d.positives() >= fold_count && d.negatives() >= fold_count;
    let mut offset = 0usize;
    let classes: &[&[u8]] = if stratified { &[&[1u8], &[0u8]] } else { &[&[0u8, 1u8]] };
    for class in classes {
        let mut rows: Vec<usize> = (0..n).filter(|&i| class.contains(&d.label(i))).collect();
        rows.shuffle(&mut rng);
        for (k, &row) in rows.iter().enumerate() {
            assignment[row] = (offset + k) % fold_count;
        }
        offset = (offset + rows.len()) % fold_count;
    }
    Ok(FoldPartition { fold_count, assignment })
}
