use crate::dataset::Dataset;
use crate::error::Result;
use crate::knngraph::{check_k, knn_lists};

use super::ScoreVector;

/// Score = distance to the k-th nearest neighbor.
pub fn knn_dist_scores(ds: &Dataset, k: usize) -> Result<ScoreVector> {
    check_k(k, ds.count())?;
    let (_, dists) = knn_lists(ds, k);
    Ok(dists.chunks_exact(k).map(|d| d[k - 1]).collect())
}
