//! Exact k-nearest-neighbor graph.
//!
//! Neighbor lists come from a KD-tree with exact backtracking. Ordering is by
//! squared distance, ties broken by ascending object index, so the result is
//! identical to sorting all pairs by brute force.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::dataset::{sq_dist, Dataset};
use crate::error::{OsdError, Result};

/// An undirected edge `a < b` with weight `-‖x_a - x_b‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct KnnGraph {
    k: usize,
    neighbors: Vec<usize>,
    distances: Vec<f64>,
    edges: Vec<Edge>,
}

impl KnnGraph {
    /// Builds the graph. The edge set is the undirected union of every
    /// `i -> neighbor` relation, each pair stored once.
    pub fn build(ds: &Dataset, k: usize) -> Result<Self> {
        let n = ds.count();
        check_k(k, n)?;
        let (neighbors, distances) = knn_lists(ds, k);

        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * k);
        for i in 0..n {
            for &j in &neighbors[i * k..(i + 1) * k] {
                pairs.push((i.min(j), i.max(j)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let edges = pairs
            .into_iter()
            .map(|(a, b)| Edge {
                a,
                b,
                weight: -sq_dist(ds.point(a), ds.point(b)).sqrt(),
            })
            .collect();

        Ok(Self {
            k,
            neighbors,
            distances,
            edges,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self) -> usize {
        self.neighbors.len() / self.k
    }

    /// Neighbors of `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    /// Distances matching [`KnnGraph::neighbors`].
    pub fn neighbor_distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Distance from `i` to its k-th nearest neighbor.
    pub fn kth_neighbor_distance(&self, i: usize) -> Result<f64> {
        if i >= self.count() {
            return Err(OsdError::IndexOutOfRange {
                index: i,
                count: self.count(),
            });
        }
        Ok(self.distances[(i + 1) * self.k - 1])
    }
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        return Err(OsdError::ParamOutOfRange {
            name: "k",
            value: k.to_string(),
            expected: format!("1 <= k <= {}", n.saturating_sub(1)),
        });
    }
    Ok(())
}

/// Flat `N*k` neighbor indices and distances for every object (self excluded).
/// Callers validate `k`.
pub fn knn_lists(ds: &Dataset, k: usize) -> (Vec<usize>, Vec<f64>) {
    let tree = KdTree::new(ds);
    let per_object: Vec<Vec<(f64, usize)>> = (0..ds.count())
        .into_par_iter()
        .map(|i| tree.nearest(ds.point(i), k, Some(i)))
        .collect();
    let mut nbrs = Vec::with_capacity(ds.count() * k);
    let mut dists = Vec::with_capacity(ds.count() * k);
    for list in per_object {
        for (d2, j) in list {
            nbrs.push(j);
            dists.push(d2.sqrt());
        }
    }
    (nbrs, dists)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    d2: f64,
    idx: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

const LEAF_SIZE: usize = 16;

/// Static KD-tree over a borrowed dataset.
pub(crate) struct KdTree<'a> {
    ds: &'a Dataset,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub(crate) fn new(ds: &'a Dataset) -> Self {
        let mut tree = Self {
            ds,
            order: (0..ds.count()).collect(),
            nodes: Vec::new(),
        };
        tree.build(0, ds.count());
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let ds = self.ds;
        let dim = ds.dim();
        let mut best_axis = 0;
        let mut best_spread = -1.0;
        for axis in 0..dim {
            let (lo, hi) = self.order[start..end]
                .iter()
                .map(|&i| ds.point(i)[axis])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        if best_spread <= 0.0 {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            ds.point(a)[best_axis].total_cmp(&ds.point(b)[best_axis])
        });
        let value = ds.point(self.order[mid])[best_axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis: best_axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest objects to `query` as `(squared distance, index)`,
    /// ascending by `(distance, index)`, skipping `exclude`.
    pub(crate) fn nearest(
        &self,
        query: &[f64],
        k: usize,
        exclude: Option<usize>,
    ) -> Vec<(f64, usize)> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.search(0, query, k, exclude, &mut heap);
        }
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| (c.d2, c.idx))
            .collect()
    }

    fn search(
        &self,
        node: usize,
        query: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let cand = Candidate {
                        d2: sq_dist(query, self.ds.point(i)),
                        idx: i,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, k, exclude, heap);
                // Equal bound is not pruned: an equidistant point with a
                // smaller index may live on the far side.
                let must_visit =
                    heap.len() < k || diff * diff <= heap.peek().map_or(f64::INFINITY, |c| c.d2);
                if must_visit {
                    self.search(far, query, k, exclude, heap);
                }
            }
        }
    }
}
