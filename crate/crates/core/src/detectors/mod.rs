//! Baseline outlier detectors. Every detector returns one finite score per
//! object, aligned with row order; larger means more outlying.

mod iforest;
mod knn_dist;
mod lof;

pub use iforest::{average_path_length, iforest_scores, IsolationForest};
pub use knn_dist::knn_dist_scores;
pub use lof::lof_scores;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;

/// Anomaly scores in dataset row order.
pub type ScoreVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Lof,
    Iforest,
    Knn,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] =
        [DetectorKind::Lof, DetectorKind::Iforest, DetectorKind::Knn];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Lof => "lof",
            DetectorKind::Iforest => "iforest",
            DetectorKind::Knn => "knn",
        }
    }
}

/// Hyperparameters shared by the baseline detectors. Neighbor counts and the
/// subsample size are clamped to what the dataset allows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub lof_neighbors: usize,
    pub iforest_trees: usize,
    /// `None` means `min(256, N)`.
    pub iforest_subsample: Option<usize>,
    pub knn_k: usize,
    pub seed: u64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            lof_neighbors: 20,
            iforest_trees: 100,
            iforest_subsample: None,
            knn_k: 10,
            seed: 0,
        }
    }
}

/// Runs one detector with the clamped parameters.
pub fn score(kind: DetectorKind, ds: &Dataset, params: &DetectorParams) -> Result<ScoreVector> {
    let n = ds.count();
    match kind {
        DetectorKind::Lof => lof_scores(ds, params.lof_neighbors.min(n - 1)),
        DetectorKind::Iforest => iforest_scores(
            ds,
            params.iforest_trees,
            params.iforest_subsample.unwrap_or(256).min(n),
            params.seed,
        ),
        DetectorKind::Knn => knn_dist_scores(ds, params.knn_k.min(n - 1)),
    }
}
