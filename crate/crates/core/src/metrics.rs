//! Rank metrics for anomaly scores against binary labels.
//!
//! Tie policy: ROC-AUC gives half credit to tied outlier/normal pairs; average
//! precision ranks tied scores by ascending object index.

use serde::{Deserialize, Serialize};

use crate::dataset::Labels;
use crate::error::{OsdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub auc: f64,
    pub ap: f64,
    pub n_outliers: usize,
    pub n_normals: usize,
}

fn check(scores: &[f64], labels: &Labels) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(OsdError::LabelLength {
            labels: labels.len(),
            objects: scores.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(OsdError::NonFinite { row: i, column: 0 });
    }
    Ok(())
}

/// Probability that a random outlier outscores a random normal object,
/// computed from mid-ranks in O(N log N).
pub fn roc_auc(scores: &[f64], labels: &Labels) -> Result<f64> {
    check(scores, labels)?;
    let pos = labels.n_outliers();
    let neg = labels.n_normals();
    if pos == 0 || neg == 0 {
        return Err(OsdError::SingleClass {
            outliers: pos,
            normals: neg,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // sum of 1-based mid-ranks of the outliers
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mid_rank = (start + 1 + end) as f64 / 2.0;
        let outliers_in_group = order[start..end]
            .iter()
            .filter(|&&i| labels.is_outlier(i))
            .count();
        rank_sum += mid_rank * outliers_in_group as f64;
        start = end;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Σ (R_k - R_{k-1}) P_k over the ranking by descending score.
pub fn average_precision(scores: &[f64], labels: &Labels) -> Result<f64> {
    check(scores, labels)?;
    let pos = labels.n_outliers();
    if pos == 0 {
        return Err(OsdError::SingleClass {
            outliers: 0,
            normals: labels.n_normals(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut hits = 0usize;
    let mut ap = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels.is_outlier(i) {
            hits += 1;
            ap += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(ap / pos as f64)
}

pub fn evaluate_scores(scores: &[f64], labels: &Labels) -> Result<EvalResult> {
    Ok(EvalResult {
        auc: roc_auc(scores, labels)?,
        ap: average_precision(scores, labels)?,
        n_outliers: labels.n_outliers(),
        n_normals: labels.n_normals(),
    })
}
