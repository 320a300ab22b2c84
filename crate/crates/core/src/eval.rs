//! Stratified k-fold cross-validation and the five scalar performance
//! measures: accuracy, precision, recall, F1 and AUC-ROC.
//!
//! The positive class throughout is "the MR applies to this method".

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, MrKind};
use crate::learn::{self, ClassifierKind, HyperParams, LearnError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("class {class} has only {count} members, need at least k = {k} for stratified folds")]
    Fold { class: u8, count: usize, k: usize },
    #[error("prediction and truth vectors differ in length: {pred} vs {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("AUC-ROC needs both classes present in the truth vector")]
    SingleClass,
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Assignment of every row to one of `k` folds, stratified by class.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index per row, all in `[0, k)`.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// Row indices of the given fold.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row indices of every fold but the given one.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Build a stratified fold plan: positives and negatives are shuffled
/// separately and dealt round-robin, so per-fold positive counts differ from
/// `n_pos / k` by at most one. Negatives are dealt in reverse fold order,
/// which keeps total fold sizes balanced as well.
pub fn make_folds(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::BadK(k));
    }
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y == 1 {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    if pos.len() < k {
        return Err(EvalError::Fold { class: 1, count: pos.len(), k });
    }
    if neg.len() < k {
        return Err(EvalError::Fold { class: 0, count: neg.len(), k });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut assignments = vec![0usize; labels.len()];
    for (j, &row) in pos.iter().enumerate() {
        assignments[row] = j % k;
    }
    for (j, &row) in neg.iter().enumerate() {
        assignments[row] = k - 1 - (j % k);
    }
    Ok(FoldPlan { k, assignments, seed })
}

/// Confusion-matrix counts for one evaluated split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

pub fn confusion(pred: &[u8], truth: &[u8]) -> Result<ConfusionCounts, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (1, 1) => c.tp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fp += 1,
            _ => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Accuracy, precision, recall and F1 from confusion counts.
///
/// Zero-denominator convention: precision, recall and F1 are 0 when their
/// denominators are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn scalar_metrics(c: &ConfusionCounts) -> ScalarMetrics {
    let total = c.total();
    assert!(total > 0, "scalar_metrics needs at least one evaluated row");
    let accuracy = (c.tp + c.tn) as f64 / total as f64;
    let precision = if c.tp + c.fp == 0 {
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    };
    let recall = if c.tp + c.fn_ == 0 {
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ScalarMetrics { accuracy, precision, recall, f1 }
}

/// AUC-ROC as the Mann-Whitney statistic: the probability that a random
/// positive outranks a random negative, ties counting one half.
///
/// Computed exactly from tie-averaged ranks, which equals the pairwise sum
/// `#(pos > neg) + 0.5 * #(pos == neg)` divided by `n_pos * n_neg`.
pub fn auc_roc(scores: &[f64], truth: &[u8]) -> Result<f64, EvalError> {
    if scores.len() != truth.len() {
        return Err(EvalError::LengthMismatch { pred: scores.len(), truth: truth.len() });
    }
    let n_pos = truth.iter().filter(|&&t| t == 1).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Tie-averaged ranks, 1-based.
    let mut rank = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }

    let rank_sum_pos: f64 = truth
        .iter()
        .zip(&rank)
        .filter(|(&t, _)| t == 1)
        .map(|(_, &r)| r)
        .sum();
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Metrics for one evaluated fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
}

/// Mean of the five measures over evaluated folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
}

/// Cross-validation result for one (MR, classifier, feature subset) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub mr: MrKind,
    pub classifier: ClassifierKind,
    pub feature_subset: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub per_fold: Vec<FoldMetrics>,
    pub mean: MeanMetrics,
    pub warnings: Vec<String>,
}

fn mean_of(per_fold: &[FoldMetrics]) -> MeanMetrics {
    let n = per_fold.len() as f64;
    MeanMetrics {
        accuracy: per_fold.iter().map(|m| m.accuracy).sum::<f64>() / n,
        precision: per_fold.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: per_fold.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: per_fold.iter().map(|m| m.f1).sum::<f64>() / n,
        auc_roc: per_fold.iter().map(|m| m.auc_roc).sum::<f64>() / n,
    }
}

/// Evaluate one train/test split and record the five measures.
fn eval_split(
    ds: &Dataset,
    mr: MrKind,
    kind: ClassifierKind,
    params: &HyperParams,
    train: &[usize],
    test: &[usize],
    fold: usize,
) -> Result<FoldMetrics, LearnError> {
    let (train_x, train_y) = ds.slice(train, mr);
    let model = learn::train_on(kind, &train_x, &train_y, &ds.feature_names, params)?;

    let (test_x, test_y) = ds.slice(test, mr);
    let mut scores = Vec::with_capacity(test.len());
    let mut preds = Vec::with_capacity(test.len());
    for row in &test_x {
        scores.push(model.predict_score(row).expect("row width fixed by slice"));
        preds.push(model.predict_label_default(row).expect("row width fixed by slice"));
    }

    let c = confusion(&preds, &test_y).expect("same length by construction");
    let s = scalar_metrics(&c);
    let auc = auc_roc(&scores, &test_y).expect("stratified folds keep both classes");
    Ok(FoldMetrics {
        fold,
        accuracy: s.accuracy,
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        auc_roc: auc,
    })
}

/// Stratified k-fold cross-validation of one classifier on one MR.
///
/// Fold `i` trains with `params.seed` replaced by `seed + i`, so fold work is
/// independent and the whole run is determined by `(ds, mr, kind, params,
/// subset, k, seed)`. Folds whose training split degenerates to a single
/// class are skipped with a warning and the mean divides by the folds that
/// actually ran.
pub fn cross_validate(
    ds: &Dataset,
    mr: MrKind,
    kind: ClassifierKind,
    params: &HyperParams,
    subset: Option<&[String]>,
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let view;
    let ds = match subset {
        Some(names) => {
            view = ds.select_features(names).map_err(LearnError::from_dataset)?;
            &view
        }
        None => ds,
    };

    let labels = ds.labels_for(mr);
    let plan = make_folds(&labels, k, seed)?;

    let mut per_fold = Vec::with_capacity(k);
    let mut warnings = Vec::new();
    for fold in 0..k {
        let train = plan.train_rows(fold);
        let test = plan.test_rows(fold);
        let fold_params = HyperParams { seed: seed.wrapping_add(fold as u64), ..params.clone() };
        match eval_split(ds, mr, kind, &fold_params, &train, &test, fold) {
            Ok(m) => per_fold.push(m),
            Err(LearnError::DegenerateData(msg)) => {
                warnings.push(format!("fold {fold} skipped: {msg}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if per_fold.is_empty() {
        return Err(EvalError::Learn(LearnError::DegenerateData(
            "every fold degenerated to a single class".into(),
        )));
    }
    if per_fold.len() < k {
        warnings.push(format!("mean taken over {} of {} folds", per_fold.len(), k));
    }

    let mean = mean_of(&per_fold);
    Ok(EvalReport {
        mr,
        classifier: kind,
        feature_subset: ds.feature_names.clone(),
        k,
        seed,
        per_fold,
        mean,
        warnings,
    })
}

/// Repeated stratified holdout (e.g. 70:30 x 10): an alternative to k-fold
/// that shares the metrics code. Repeat `r` draws a stratified split with
/// seed `seed + r`, trains on the first part and evaluates on the second.
pub fn repeated_holdout(
    ds: &Dataset,
    mr: MrKind,
    kind: ClassifierKind,
    params: &HyperParams,
    subset: Option<&[String]>,
    train_pct: u32,
    repeats: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    assert!(train_pct > 0 && train_pct < 100, "train percentage must be in (0, 100)");
    let view;
    let ds = match subset {
        Some(names) => {
            view = ds.select_features(names).map_err(LearnError::from_dataset)?;
            &view
        }
        None => ds,
    };

    let labels = ds.labels_for(mr);
    let mut per_fold = Vec::with_capacity(repeats);
    let mut warnings = Vec::new();
    for rep in 0..repeats {
        let rep_seed = seed.wrapping_add(rep as u64);
        let (train, test) = stratified_split(&labels, train_pct, rep_seed)?;
        let fold_params = HyperParams { seed: rep_seed, ..params.clone() };
        match eval_split(ds, mr, kind, &fold_params, &train, &test, rep) {
            Ok(m) => per_fold.push(m),
            Err(LearnError::DegenerateData(msg)) => {
                warnings.push(format!("repeat {rep} skipped: {msg}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if per_fold.is_empty() {
        return Err(EvalError::Learn(LearnError::DegenerateData(
            "every repeat degenerated to a single class".into(),
        )));
    }
    let mean = mean_of(&per_fold);
    Ok(EvalReport {
        mr,
        classifier: kind,
        feature_subset: ds.feature_names.clone(),
        k: repeats,
        seed,
        per_fold,
        mean,
        warnings,
    })
}

/// One stratified train/test split. Both classes contribute at least one row
/// to each side.
fn stratified_split(
    labels: &[u8],
    train_pct: u32,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y == 1 {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    if pos.len() < 2 {
        return Err(EvalError::Fold { class: 1, count: pos.len(), k: 2 });
    }
    if neg.len() < 2 {
        return Err(EvalError::Fold { class: 0, count: neg.len(), k: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let take = |v: &[usize]| -> usize {
        let n = (v.len() * train_pct as usize + 50) / 100;
        n.clamp(1, v.len() - 1)
    };
    let (p, q) = (take(&pos), take(&neg));
    let mut train: Vec<usize> = pos[..p].iter().chain(neg[..q].iter()).copied().collect();
    let mut test: Vec<usize> = pos[p..].iter().chain(neg[q..].iter()).copied().collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
