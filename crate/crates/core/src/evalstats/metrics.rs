//! Ranking and confusion-matrix metrics.

use crate::error::{ExposeError, Result};
use crate::model::Label;

/// 1-based ranks of `values` with ties resolved by averaging.
///
/// `descending` ranks the largest value 1 (the convention for "higher
/// metric is better").
pub(crate) fn average_ranks(values: &[f64], descending: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        if descending {
            values[j].total_cmp(&values[i])
        } else {
            values[i].total_cmp(&values[j])
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && values[order[end]] == values[order[pos]] {
            end += 1;
        }
        // Average of the 1-based positions pos+1 ..= end.
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &idx in &order[pos..end] {
            ranks[idx] = avg;
        }
        pos = end;
    }
    ranks
}

/// Area under the ROC curve via the rank-sum (Mann-Whitney) statistic, with
/// tied scores counted one half.
///
/// Convention: a higher score means more normal, and the returned value is
/// the probability that a random normal instance outranks a random anomaly.
pub fn auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(ExposeError::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(ExposeError::NonFinite);
    }
    let n_normal = labels.iter().filter(|&&l| l == Label::Normal).count();
    let n_anomaly = labels.len() - n_normal;
    if n_normal == 0 || n_anomaly == 0 {
        return Err(ExposeError::SingleClass);
    }
    let ranks = average_ranks(scores, false);
    let normal_rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == Label::Normal)
        .map(|(r, _)| r)
        .sum();
    let n1 = n_normal as f64;
    let u = normal_rank_sum - n1 * (n1 + 1.0) / 2.0;
    Ok(u / (n1 * n_anomaly as f64))
}

/// Mean of the true-positive and true-negative rates:
/// `0.5 tp/(tp+fn) + 0.5 tn/(tn+fp)`. Insensitive to class imbalance.
pub fn balanced_accuracy(tp: u64, fn_: u64, tn: u64, fp: u64) -> Result<f64> {
    if tp + fn_ == 0 || tn + fp == 0 {
        return Err(ExposeError::SingleClass);
    }
    let tpr = tp as f64 / (tp + fn_) as f64;
    let tnr = tn as f64 / (tn + fp) as f64;
    Ok(0.5 * tpr + 0.5 * tnr)
}
