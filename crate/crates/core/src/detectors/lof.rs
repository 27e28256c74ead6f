//! Local Outlier Factor.
//!
//! reach-dist(p, o) = max(k-distance(o), d(p, o)); lrd(p) is the inverse of
//! the mean reach-distance to the neighbors of p; LOF(p) is the mean lrd of
//! the neighbors divided by lrd(p). Neighborhoods hold exactly k objects with
//! the crate-wide tie rule.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::knngraph::{check_k, knn_lists};

use super::ScoreVector;

/// Keeps lrd finite when an object and all its neighbors coincide.
const REACH_FLOOR: f64 = 1e-10;

pub fn lof_scores(ds: &Dataset, n_neighbors: usize) -> Result<ScoreVector> {
    let n = ds.count();
    check_k(n_neighbors, n)?;
    let k = n_neighbors;
    let (nbrs, dists) = knn_lists(ds, k);
    let k_distance: Vec<f64> = dists.chunks_exact(k).map(|d| d[k - 1]).collect();

    let lrd: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let reach: f64 = (0..k)
                .map(|s| {
                    let j = nbrs[i * k + s];
                    k_distance[j].max(dists[i * k + s])
                })
                .sum();
            1.0 / (reach / k as f64 + REACH_FLOOR)
        })
        .collect();

    Ok((0..n)
        .map(|i| {
            let mean_nbr: f64 = nbrs[i * k..(i + 1) * k]
                .iter()
                .map(|&j| lrd[j])
                .sum::<f64>()
                / k as f64;
            mean_nbr / lrd[i]
        })
        .collect())
}
