//! Classifier metrics and feature-stability measurement.
//!
//! AUC is computed as a tie-aware rank statistic (the Mann–Whitney form):
//! with `R1` the sum of average ranks of the positive scores,
//!
//! ```text
//! AUC = (R1 - n1*(n1+1)/2) / (n1 * n0)
//! ```
//!
//! which equals the probability that a random positive outscores a random
//! negative, counting ties as half. Tied scores share their average rank,
//! so the statistic is exact — no trapezoid approximation.
//!
//! Population Stability Index between a reference ("actual", the training
//! sample that defines the bins) and a comparison ("expected") sample:
//!
//! ```text
//! PSI = sum_b (q_a,b - q_e,b) * ln(q_a,b / q_e,b)
//! ```
//!
//! over equal-frequency bins of the reference, with proportions clamped
//! below at 1e-6 so empty bins keep the sum finite. Every summand is
//! non-negative, identical samples give exactly zero, and values below
//! 0.05 are conventionally read as "stable".

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by metric computations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    /// AUC and curve metrics need both classes present.
    #[error("evaluation requires both classes, got only label {0}")]
    SingleClassEval(u8),
    /// Scores and labels must align one-to-one.
    #[error("length mismatch: {scores} scores vs {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    /// PSI needs non-empty samples on both sides.
    #[error("{0} sample is empty")]
    EmptySample(&'static str),
    /// PSI needs at least one bin.
    #[error("n_bins must be at least 1")]
    InvalidBins,
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<(), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    Ok(())
}

fn class_counts(labels: &[u8]) -> (u64, u64) {
    let n_pos = labels.iter().filter(|l| **l == 1).count() as u64;
    (n_pos, labels.len() as u64 - n_pos)
}

fn require_both_classes(labels: &[u8]) -> Result<(u64, u64), EvalError> {
    let (n_pos, n_neg) = class_counts(labels);
    if n_pos == 0 {
        return Err(EvalError::SingleClassEval(0));
    }
    if n_neg == 0 {
        return Err(EvalError::SingleClassEval(1));
    }
    Ok((n_pos, n_neg))
}

/// Tie-aware ROC AUC via average ranks.
///
/// # Errors
///
/// [`EvalError::SingleClassEval`] when labels hold a single class and
/// [`EvalError::LengthMismatch`] on misaligned inputs.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64, EvalError> {
    check_lengths(scores, labels)?;
    let (n_pos, n_neg) = require_both_classes(labels)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("scores are never NaN")
    });

    // Walk groups of tied scores; each member gets the group's average
    // 1-based rank. Ranks are integers or half-integers, so the sums
    // below are exact in f64 for any realistic n.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let average_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += average_rank;
            }
        }
        i = j;
    }
    let n1 = n_pos as f64;
    Ok((rank_sum_pos - n1 * (n1 + 1.0) / 2.0) / (n1 * n_neg as f64))
}

/// Confusion counts and derived rates at a fixed probability threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    /// Fraud-class precision `TP/(TP+FP)`; 0 when undefined (see flag).
    pub precision: f64,
    /// False when no positive predictions exist (`TP+FP = 0`).
    pub precision_defined: bool,
    /// Fraud-class recall `TP/(TP+FN)`; 0 when undefined (see flag).
    pub recall: f64,
    /// False when no positive labels exist (`TP+FN = 0`).
    pub recall_defined: bool,
    /// Support-weighted average of per-class precision.
    pub weighted_precision: f64,
    /// Support-weighted average of per-class recall.
    pub weighted_recall: f64,
}

/// Classifies `score >= threshold` as positive and tabulates the result.
///
/// # Errors
///
/// [`EvalError::LengthMismatch`] only; single-class inputs are fine here.
pub fn confusion_at(
    scores: &[f64],
    labels: &[u8],
    threshold: f64,
) -> Result<ThresholdMetrics, EvalError> {
    check_lengths(scores, labels)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (score, &label) in scores.iter().zip(labels) {
        let predicted = *score >= threshold;
        match (predicted, label) {
            (true, 1) => tp += 1,
            (true, _) => fp += 1,
            (false, 1) => fn_ += 1,
            (false, _) => tn += 1,
        }
    }
    let n = (tp + fp + tn + fn_) as f64;
    let ratio = |num: u64, den: u64| {
        if den > 0 {
            num as f64 / den as f64
        } else {
            0.0
        }
    };

    let precision_defined = tp + fp > 0;
    let recall_defined = tp + fn_ > 0;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    // Per-class rates for the support-weighted averages: the negative
    // class's "precision" is TN/(TN+FN) and its "recall" TN/(TN+FP).
    let precision_neg = ratio(tn, tn + fn_);
    let recall_neg = ratio(tn, tn + fp);
    let support_pos = (tp + fn_) as f64;
    let support_neg = (tn + fp) as f64;
    let weighted = |pos: f64, neg: f64| {
        if n > 0.0 {
            (pos * support_pos + neg * support_neg) / n
        } else {
            0.0
        }
    };

    Ok(ThresholdMetrics {
        threshold,
        tp,
        fp,
        tn,
        fn_,
        accuracy: if n > 0.0 { (tp + tn) as f64 / n } else { 0.0 },
        precision,
        precision_defined,
        recall,
        recall_defined,
        weighted_precision: weighted(precision, precision_neg),
        weighted_recall: weighted(recall, recall_neg),
    })
}

/// Sorted index descending by score, with label access.
fn descending_groups(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are never NaN")
    });
    order
}

/// ROC curve points `(fpr, tpr)` from `(0,0)` to `(1,1)`, one point per
/// distinct score threshold in descending order.
///
/// # Errors
///
/// Same as [`roc_auc`].
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>, EvalError> {
    check_lengths(scores, labels)?;
    let (n_pos, n_neg) = require_both_classes(labels)?;
    let order = descending_groups(scores);

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        i = j;
    }
    Ok(points)
}

/// Precision-recall points in descending threshold order, starting at
/// the conventional `(recall 0, precision 1)` anchor. At most one point
/// per distinct score plus the anchor.
///
/// # Errors
///
/// Same as [`roc_auc`].
pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>, EvalError> {
    check_lengths(scores, labels)?;
    let (n_pos, _) = require_both_classes(labels)?;
    let order = descending_groups(scores);

    let mut points = vec![(0.0, 1.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push((tp as f64 / n_pos as f64, tp as f64 / (tp + fp) as f64));
        i = j;
    }
    Ok(points)
}

/// Everything evaluate emits for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc: f64,
    pub at_threshold: ThresholdMetrics,
    pub roc_points: Vec<(f64, f64)>,
    pub pr_points: Vec<(f64, f64)>,
}

/// Computes the full metric set (AUC, confusion at 0.5, both curves).
///
/// # Errors
///
/// Same as [`roc_auc`].
pub fn evaluate_scores(scores: &[f64], labels: &[u8]) -> Result<MetricsReport, EvalError> {
    Ok(MetricsReport {
        auc: roc_auc(scores, labels)?,
        at_threshold: confusion_at(scores, labels, 0.5)?,
        roc_points: roc_curve(scores, labels)?,
        pr_points: pr_curve(scores, labels)?,
    })
}

/// PSI of one feature, with the full bin breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub psi: f64,
    /// Interior bin edges; bin `i` covers `[edge[i-1], edge[i])` with
    /// implicit −∞/+∞ at the ends.
    pub bin_edges: Vec<f64>,
    /// Clamped per-bin proportions of the reference sample.
    pub q_actual: Vec<f64>,
    /// Clamped per-bin proportions of the comparison sample.
    pub q_expected: Vec<f64>,
    pub count_actual: Vec<u64>,
    pub count_expected: Vec<u64>,
    pub n_actual: u64,
    pub n_expected: u64,
    /// Set when all reference values are identical (single bin, PSI 0).
    pub degenerate: bool,
}

const PSI_CLAMP: f64 = 1e-6;

/// Equal-frequency interior edges from the sorted reference sample:
/// `edge_k = sorted[floor(k * n / n_bins)]`, duplicates merged.
fn quantile_edges(sorted: &[f64], n_bins: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut edges = Vec::with_capacity(n_bins.saturating_sub(1));
    for k in 1..n_bins {
        let edge = sorted[k * n / n_bins];
        if edges.last() != Some(&edge) {
            edges.push(edge);
        }
    }
    edges
}

fn bin_of(value: f64, edges: &[f64]) -> usize {
    edges.partition_point(|e| value >= *e)
}

/// PSI over externally fixed bin edges (used by both [`psi`] and the
/// symmetry property tests).
pub fn psi_with_edges(actual: &[f64], expected: &[f64], edges: &[f64]) -> PsiEntry {
    let n_bins = edges.len() + 1;
    let mut count_actual = vec![0u64; n_bins];
    let mut count_expected = vec![0u64; n_bins];
    for v in actual {
        count_actual[bin_of(*v, edges)] += 1;
    }
    for v in expected {
        count_expected[bin_of(*v, edges)] += 1;
    }
    let proportions = |counts: &[u64], n: u64| -> Vec<f64> {
        counts
            .iter()
            .map(|c| (*c as f64 / n as f64).max(PSI_CLAMP))
            .collect()
    };
    let q_actual = proportions(&count_actual, actual.len() as u64);
    let q_expected = proportions(&count_expected, expected.len() as u64);
    let psi: f64 = q_actual
        .iter()
        .zip(&q_expected)
        .map(|(qa, qe)| (qa - qe) * (qa / qe).ln())
        .sum();
    PsiEntry {
        psi,
        bin_edges: edges.to_vec(),
        q_actual,
        q_expected,
        count_actual,
        count_expected,
        n_actual: actual.len() as u64,
        n_expected: expected.len() as u64,
        degenerate: false,
    }
}

/// Population Stability Index between two samples.
///
/// Bin edges are the equal-frequency quantiles of `actual` (the
/// reference/training sample). A constant reference cannot be binned; it
/// is reported as PSI 0 with the `degenerate` flag set rather than as a
/// hard failure, so a constant feature never aborts a stability sweep.
///
/// # Errors
///
/// [`EvalError::EmptySample`] / [`EvalError::InvalidBins`] on unusable
/// inputs.
pub fn psi(actual: &[f64], expected: &[f64], n_bins: usize) -> Result<PsiEntry, EvalError> {
    if actual.is_empty() {
        return Err(EvalError::EmptySample("actual"));
    }
    if expected.is_empty() {
        return Err(EvalError::EmptySample("expected"));
    }
    if n_bins == 0 {
        return Err(EvalError::InvalidBins);
    }
    let mut sorted = actual.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("feature values are never NaN"));
    if sorted[0] == sorted[sorted.len() - 1] {
        // All reference values identical: one bin holds everything on
        // both sides, so the PSI is zero by construction.
        let mut entry = psi_with_edges(actual, expected, &[]);
        entry.degenerate = true;
        return Ok(entry);
    }
    Ok(psi_with_edges(
        actual,
        expected,
        &quantile_edges(&sorted, n_bins),
    ))
}
