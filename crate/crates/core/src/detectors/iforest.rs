//! Isolation Forest with axis-parallel random splits.
//!
//! Each tree is grown on a subsample without replacement up to depth
//! `ceil(log2(subsample))`. The anomaly score is `2^(-E[h(x)] / c(ψ))` where
//! `c(n) = 2 H(n-1) - 2 (n-1) / n` is the average unsuccessful-search path
//! length of a binary search tree.

use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{OsdError, Result};

use super::ScoreVector;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn harmonic(m: usize) -> f64 {
    if m <= 1024 {
        (1..=m).map(|i| 1.0 / i as f64).sum()
    } else {
        let m = m as f64;
        m.ln() + EULER_GAMMA + 1.0 / (2.0 * m) - 1.0 / (12.0 * m * m)
    }
}

/// `c(n)`, with `c(0) = c(1) = 0`.
pub fn average_path_length(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    2.0 * harmonic(n - 1) - 2.0 * (n - 1) as f64 / n as f64
}

enum Node {
    External {
        size: usize,
    },
    Internal {
        feature: usize,
        split: f64,
        left: usize,
        right: usize,
    },
}

struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn grow(ds: &Dataset, mut rows: Vec<usize>, max_depth: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow_node(ds, &mut rows, 0, max_depth, rng);
        tree
    }

    fn grow_node(
        &mut self,
        ds: &Dataset,
        rows: &mut [usize],
        depth: usize,
        max_depth: usize,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::External { size: rows.len() });
        if rows.len() <= 1 || depth >= max_depth {
            return id;
        }
        // features that still vary inside this node
        let ranges: Vec<(usize, f64, f64)> = (0..ds.dim())
            .filter_map(|f| {
                let (lo, hi) = rows
                    .iter()
                    .map(|&r| ds.point(r)[f])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                (hi > lo).then_some((f, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            return id;
        }
        let (feature, lo, hi) = ranges[rng.random_range(0..ranges.len())];
        let split = rng.random_range(lo..hi);
        // left: value <= split (holds the minimum), right: value > split (holds the maximum)
        let mut cut = 0;
        for i in 0..rows.len() {
            if ds.point(rows[i])[feature] <= split {
                rows.swap(i, cut);
                cut += 1;
            }
        }
        let (l, r) = rows.split_at_mut(cut);
        let left = self.grow_node(ds, l, depth + 1, max_depth, rng);
        let right = self.grow_node(ds, r, depth + 1, max_depth, rng);
        self.nodes[id] = Node::Internal {
            feature,
            split,
            left,
            right,
        };
        id
    }

    fn path_length(&self, x: &[f64]) -> f64 {
        let mut node = 0;
        let mut depth = 0.0;
        loop {
            match self.nodes[node] {
                Node::External { size } => return depth + average_path_length(size),
                Node::Internal {
                    feature,
                    split,
                    left,
                    right,
                } => {
                    node = if x[feature] <= split { left } else { right };
                    depth += 1.0;
                }
            }
        }
    }
}

/// A fitted forest.
pub struct IsolationForest {
    trees: Vec<Tree>,
    subsample: usize,
}

impl IsolationForest {
    /// Fits `n_trees` trees. Tree `t` draws from its own generator, seeded by
    /// the `t`-th output of a master generator seeded with `seed`.
    pub fn fit(ds: &Dataset, n_trees: usize, subsample: usize, seed: u64) -> Result<Self> {
        let n = ds.count();
        if n_trees == 0 {
            return Err(OsdError::ParamOutOfRange {
                name: "n_trees",
                value: "0".into(),
                expected: ">= 1".into(),
            });
        }
        if subsample < 2 || subsample > n {
            return Err(OsdError::ParamOutOfRange {
                name: "subsample",
                value: subsample.to_string(),
                expected: format!("2 <= subsample <= {n}"),
            });
        }
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..n_trees).map(|_| master.random()).collect();
        let max_depth = (subsample as f64).log2().ceil() as usize;
        let trees = seeds
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let rows = sample(&mut rng, n, subsample).into_vec();
                Tree::grow(ds, rows, max_depth, &mut rng)
            })
            .collect();
        Ok(Self { trees, subsample })
    }

    /// Mean path length of `x` over the forest.
    pub fn mean_path_length(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        score_from_path(self.mean_path_length(x), self.subsample)
    }
}

/// `2^(-mean_path / c(subsample))`.
pub fn score_from_path(mean_path: f64, subsample: usize) -> f64 {
    (-mean_path / average_path_length(subsample)).exp2()
}

pub fn iforest_scores(
    ds: &Dataset,
    n_trees: usize,
    subsample: usize,
    seed: u64,
) -> Result<ScoreVector> {
    let forest = IsolationForest::fit(ds, n_trees, subsample, seed)?;
    Ok((0..ds.count())
        .into_par_iter()
        .map(|i| forest.score(ds.point(i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn normalization_constant() {
        assert_eq!(average_path_length(2), 1.0);
        assert_eq!(average_path_length(1), 0.0);
        // c(3) = 2 (1 + 1/2) - 4/3
        assert!((average_path_length(3) - (3.0 - 4.0 / 3.0)).abs() < 1e-15);
        // asymptotic branch is continuous with the exact sum
        let exact: f64 =
            2.0 * (1..=1500).map(|i| 1.0 / i as f64).sum::<f64>() - 2.0 * 1500.0 / 1501.0;
        assert!((average_path_length(1501) - exact).abs() < 1e-9);
    }

    #[test]
    fn path_equal_to_normalizer_scores_half() {
        for psi in [2, 16, 256] {
            assert!((score_from_path(average_path_length(psi), psi) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn scores_in_open_unit_interval() {
        let ds = Dataset::from_rows(&[[1.0, 1.0]; 10]).unwrap();
        let s = iforest_scores(&ds, 10, 8, 3).unwrap();
        assert!(s.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn parameter_checks() {
        let ds = Dataset::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(iforest_scores(&ds, 0, 2, 0).is_err());
        assert!(iforest_scores(&ds, 5, 1, 0).is_err());
        assert!(iforest_scores(&ds, 5, 4, 0).is_err());
        assert!(iforest_scores(&ds, 5, 3, 0).is_ok());
    }

    #[test]
    fn far_outlier_is_top_ranked_in_almost_all_seeds() {
        let mut wins = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let nrm = Normal::new(0.0, 1.0).unwrap();
            let mut rows: Vec<[f64; 2]> = (0..100)
                .map(|_| [nrm.sample(&mut rng), nrm.sample(&mut rng)])
                .collect();
            rows.push([12.0, -12.0]);
            let ds = Dataset::from_rows(&rows).unwrap();
            let s = iforest_scores(&ds, 100, 64, seed).unwrap();
            let top = s
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            wins += usize::from(top == 100);
        }
        assert!(wins >= 95, "outlier on top in {wins}/100 seeds");
    }
}
