//! Seeded synthetic cluster + outlier datasets.
//!
//! Normal objects come first in row order, outliers last.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{sq_dist, Dataset, Labels};
use crate::error::{OsdError, Result};

/// Draws allowed per rejected center or outlier.
pub const MAX_TRIES: usize = 10_000;

struct Blob {
    center: Vec<f64>,
    spread: f64,
    count: usize,
    /// Outliers may not land closer than this to the center.
    exclusion: f64,
}

fn place_centers(
    n: usize,
    dim: usize,
    separation: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let side = separation * ((2 * n) as f64).powf(1.0 / dim as f64) + separation;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut placed = false;
        for _ in 0..MAX_TRIES {
            let c: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..side)).collect();
            if centers
                .iter()
                .all(|o| sq_dist(o, &c) >= separation * separation)
            {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(OsdError::RejectionFailure { tries: MAX_TRIES });
        }
    }
    Ok(centers)
}

fn realize(
    blobs: &[Blob],
    n_outliers: usize,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Dataset, Labels)> {
    let mut values = Vec::new();
    for b in blobs {
        for _ in 0..b.count {
            for c in 0..dim {
                let z: f64 = StandardNormal.sample(rng);
                values.push(b.center[c] + b.spread * z);
            }
        }
    }
    let n_normal = values.len() / dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for row in values.chunks_exact(dim) {
        for c in 0..dim {
            lo[c] = lo[c].min(row[c]);
            hi[c] = hi[c].max(row[c]);
        }
    }
    for _ in 0..n_outliers {
        let mut placed = false;
        for _ in 0..MAX_TRIES {
            let x: Vec<f64> = (0..dim)
                .map(|c| {
                    if hi[c] > lo[c] {
                        rng.random_range(lo[c]..hi[c])
                    } else {
                        lo[c]
                    }
                })
                .collect();
            if blobs
                .iter()
                .all(|b| sq_dist(&b.center, &x) >= b.exclusion * b.exclusion)
            {
                values.extend_from_slice(&x);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(OsdError::RejectionFailure { tries: MAX_TRIES });
        }
    }
    let mut flags = vec![false; n_normal];
    flags.resize(n_normal + n_outliers, true);
    Ok((Dataset::from_flat(values, dim)?, Labels::new(flags)))
}

fn positive(name: &'static str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(OsdError::ParamOutOfRange {
            name,
            value: "0".into(),
            expected: ">= 1".into(),
        });
    }
    Ok(())
}

/// Gaussian clusters of unit spread with centers at least `separation` apart,
/// plus outliers drawn uniformly over the bounding box of the cluster points
/// and rejected within `separation / 4` of any center.
pub fn gen_clusters_outliers(
    n_clusters: usize,
    pts_per_cluster: usize,
    n_outliers: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<(Dataset, Labels)> {
    positive("n_clusters", n_clusters)?;
    positive("pts_per_cluster", pts_per_cluster)?;
    positive("dim", dim)?;
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(OsdError::ParamOutOfRange {
            name: "separation",
            value: separation.to_string(),
            expected: "> 0".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = place_centers(n_clusters, dim, separation, &mut rng)?;
    let blobs: Vec<Blob> = centers
        .into_iter()
        .map(|center| Blob {
            center,
            spread: 1.0,
            count: pts_per_cluster,
            exclusion: separation / 4.0,
        })
        .collect();
    realize(&blobs, n_outliers, dim, &mut rng)
}

/// Layout of one density-imbalance dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ImbalanceSpec {
    pub dim: usize,
    pub pts_per_cluster: usize,
    pub n_outliers: usize,
    /// Center distance in units of the wider cluster's spread.
    pub separation: f64,
}

impl Default for ImbalanceSpec {
    /// 2-D, 2×95 normals and 10 outliers (5%).
    fn default() -> Self {
        Self {
            dim: 2,
            pts_per_cluster: 95,
            n_outliers: 10,
            separation: 10.0,
        }
    }
}

/// Spread multiplier that divides point density by `level` in `dim`
/// dimensions.
pub fn spread_for_level(level: f64, dim: usize) -> f64 {
    level.powf(1.0 / dim as f64)
}

/// One dataset per level: a unit-spread cluster and a cluster whose spread is
/// `level^(1/dim)`, so their densities differ by the factor `level`, plus
/// uniform outliers.
pub fn gen_imbalance_series(levels: &[f64], seed: u64) -> Result<Vec<(Dataset, Labels)>> {
    gen_imbalance_series_with(levels, seed, &ImbalanceSpec::default())
}

pub fn gen_imbalance_series_with(
    levels: &[f64],
    seed: u64,
    spec: &ImbalanceSpec,
) -> Result<Vec<(Dataset, Labels)>> {
    positive("dim", spec.dim)?;
    positive("pts_per_cluster", spec.pts_per_cluster)?;
    levels
        .iter()
        .enumerate()
        .map(|(idx, &level)| {
            if !(1.0..=12.0).contains(&level) {
                return Err(OsdError::ParamOutOfRange {
                    name: "level",
                    value: level.to_string(),
                    expected: "1 <= level <= 12".into(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
            let wide = spread_for_level(level, spec.dim);
            let gap = spec.separation * wide;
            let mut far = vec![0.0; spec.dim];
            far[0] = gap;
            let blobs = [
                Blob {
                    center: vec![0.0; spec.dim],
                    spread: 1.0,
                    count: spec.pts_per_cluster,
                    exclusion: 3.0,
                },
                Blob {
                    center: far,
                    spread: wide,
                    count: spec.pts_per_cluster,
                    exclusion: 3.0 * wide,
                },
            ];
            realize(&blobs, spec.n_outliers, spec.dim, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::divide_auto;
    use crate::knngraph::KnnGraph;

    #[test]
    fn no_outliers_means_all_normal() {
        let (ds, l) = gen_clusters_outliers(3, 20, 0, 2, 10.0, 1).unwrap();
        assert_eq!(ds.count(), 60);
        assert_eq!(l.n_outliers(), 0);
    }

    #[test]
    fn two_far_clusters_form_two_heavy_blocks() {
        let (ds, _) = gen_clusters_outliers(2, 50, 0, 2, 20.0, 4).unwrap();
        let g = KnnGraph::build(&ds, 5).unwrap();
        let (p, _) = divide_auto(&g, None).unwrap();
        let heavy: Vec<usize> = p.masses().into_iter().filter(|&m| m >= 50).collect();
        assert_eq!(p.len(), 2, "masses {:?}", p.masses());
        assert_eq!(heavy.len(), 2);
    }

    #[test]
    fn same_seed_same_bits() {
        let a = gen_clusters_outliers(4, 30, 6, 3, 8.0, 99).unwrap();
        let b = gen_clusters_outliers(4, 30, 6, 3, 8.0, 99).unwrap();
        assert_eq!(a, b);
        let c = gen_clusters_outliers(4, 30, 6, 3, 8.0, 100).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn outliers_respect_exclusion_radius() {
        let sep = 12.0;
        let (ds, l) = gen_clusters_outliers(3, 40, 8, 2, sep, 5).unwrap();
        // cluster means approximate the centers to well within sep/4
        for i in (0..ds.count()).filter(|&i| l.is_outlier(i)) {
            for c in 0..3 {
                let members = c * 40..(c + 1) * 40;
                let mut mean = [0.0; 2];
                for j in members {
                    mean[0] += ds.point(j)[0] / 40.0;
                    mean[1] += ds.point(j)[1] / 40.0;
                }
                assert!(sq_dist(&mean, ds.point(i)).sqrt() > sep / 4.0 - 0.6);
            }
        }
        assert!(l.n_outliers() * 10 < l.len());
    }

    #[test]
    fn bad_parameters() {
        assert!(gen_clusters_outliers(0, 10, 1, 2, 5.0, 0).is_err());
        assert!(gen_clusters_outliers(2, 10, 1, 2, 0.0, 0).is_err());
        assert!(gen_imbalance_series(&[0.5], 0).is_err());
        assert!(gen_imbalance_series(&[13.0], 0).is_err());
    }

    #[test]
    fn impossible_exclusion_fails_after_max_tries() {
        // one cluster whose exclusion radius covers the whole bounding box
        let err = gen_clusters_outliers(1, 5, 1, 1, 1e6, 0).unwrap_err();
        assert!(matches!(err, OsdError::RejectionFailure { .. }));
    }

    #[test]
    fn spread_scaling() {
        assert_eq!(spread_for_level(1.0, 2), 1.0);
        assert!((spread_for_level(4.0, 2) - 2.0).abs() < 1e-15);
        let sets = gen_imbalance_series(&[1.0, 4.0], 3).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].1.n_outliers() * 20, sets[0].1.len());
    }

    /// Density estimate from within-cluster k-distances: 1 / mean(kdist^dim).
    fn cluster_density(ds: &Dataset, range: std::ops::Range<usize>, k: usize) -> f64 {
        let rows: Vec<Vec<f64>> = range.map(|i| ds.point(i).to_vec()).collect();
        let sub = Dataset::from_rows(&rows).unwrap();
        let g = KnnGraph::build(&sub, k).unwrap();
        let dim = ds.dim() as i32;
        let m: f64 = (0..sub.count())
            .map(|i| g.kth_neighbor_distance(i).unwrap().powi(dim))
            .sum::<f64>()
            / sub.count() as f64;
        1.0 / m
    }

    #[test]
    fn empirical_density_ratio_tracks_level() {
        let spec = ImbalanceSpec::default();
        for level in [2.0, 4.0, 8.0, 12.0] {
            let mut ratio = 0.0;
            for seed in 0..10 {
                let (ds, _) = gen_imbalance_series_with(&[level], seed, &spec)
                    .unwrap()
                    .remove(0);
                let p = spec.pts_per_cluster;
                ratio += cluster_density(&ds, 0..p, 5) / cluster_density(&ds, p..2 * p, 5);
            }
            ratio /= 10.0;
            assert!(
                (ratio / level - 1.0).abs() <= 0.2,
                "level {level}: measured {ratio}"
            );
        }
    }
}
