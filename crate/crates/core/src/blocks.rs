//! Object-block division: histogram the kNN edge weights, locate the knee of
//! the probability curve, cut every edge lighter than the knee and take the
//! connected components of what remains.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{OsdError, Result};
use crate::knngraph::KnnGraph;
use crate::union_find::UnionFind;

/// Equidistant histogram of edge weights.
///
/// `probs[g]` is the edge count in bin `g` divided by the number of objects N
/// (not by the number of edges), so the probabilities need not sum to one.
/// Only the shape of the curve matters downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightHistogram {
    pub bin_edges: Vec<f64>,
    pub probs: Vec<f64>,
    pub bin_width: f64,
    /// Smallest and largest edge weight.
    pub min_weight: f64,
    pub max_weight: f64,
}

impl WeightHistogram {
    pub fn bins(&self) -> usize {
        self.probs.len()
    }

    /// Bin holding `w`; the last bin is closed on the right.
    pub fn bin_of(&self, w: f64) -> usize {
        let g = ((w - self.min_weight) / self.bin_width).floor();
        (g.max(0.0) as usize).min(self.bins() - 1)
    }

    pub fn is_degenerate(&self) -> bool {
        self.max_weight <= self.min_weight
    }
}

/// Builds the weight histogram over the deduplicated undirected edge set.
///
/// Bin width is `(max ω - min ω) * 10 / N`, i.e. about N/10 bins, never fewer
/// than two. When every edge has the same weight the histogram has two unit
/// bins and all mass sits in the first.
pub fn weight_histogram(g: &KnnGraph) -> Result<WeightHistogram> {
    let edges = g.edges();
    if edges.is_empty() {
        return Err(OsdError::EmptyEdgeSet);
    }
    let n = g.count() as f64;
    let (lo, hi) = edges
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.weight), hi.max(e.weight))
        });

    let (bins, width) = if hi <= lo {
        (2, 1.0)
    } else if n > 20.0 {
        (((n / 10.0).ceil() as usize).max(2), (hi - lo) * 10.0 / n)
    } else {
        (2, (hi - lo) / 2.0)
    };

    let mut hist = WeightHistogram {
        bin_edges: (0..=bins).map(|b| lo + b as f64 * width).collect(),
        probs: vec![0.0; bins],
        bin_width: width,
        min_weight: lo,
        max_weight: hi,
    };
    let mut counts = vec![0usize; bins];
    for e in edges {
        counts[hist.bin_of(e.weight)] += 1;
    }
    hist.probs = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(hist)
}

/// Outcome of knee detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knee {
    /// Pruning threshold: edges with weight strictly below it are cut.
    pub threshold: f64,
    /// Bin of maximal upward curvature, if one was detected.
    pub bin: Option<usize>,
    /// Inclusive bin range of the upward bend around `bin`.
    pub region: Option<(usize, usize)>,
    /// Set when the histogram had fewer than three bins and nothing is pruned.
    pub degenerate: bool,
}

/// Three-bin moving average; the window is truncated at both ends.
pub fn smooth3(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    (0..n)
        .map(|g| {
            let lo = g.saturating_sub(1);
            let hi = (g + 1).min(n - 1);
            p[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Locates the knee of the weight probability curve.
///
/// The knee is the bin `g` maximizing the discrete second difference
/// `s[g+1] - 2 s[g] + s[g-1]` of the smoothed curve `s` on its rising side,
/// keeping the first maximum. The bend around it (see [`inflection_region`])
/// is where the rare long edges give way to the bulk, and the threshold is the
/// left edge of that region: the most conservative cut inside it. An explicit
/// `override_threshold` is returned as is.
pub fn find_inflection(h: &WeightHistogram, override_threshold: Option<f64>) -> Knee {
    if let Some(t) = override_threshold {
        return Knee {
            threshold: t,
            bin: None,
            region: None,
            degenerate: false,
        };
    }
    match inflection_region(h) {
        None => Knee {
            threshold: h.min_weight,
            bin: None,
            region: None,
            degenerate: true,
        },
        Some((lo, hi)) => Knee {
            threshold: h.bin_edges[lo],
            bin: Some(knee_bin(&h.probs)),
            region: Some((lo, hi)),
            degenerate: false,
        },
    }
}

/// Second differences `D(g)` of the smoothed curve for `g` in `1..len-1`;
/// entry `i` holds `D(i + 1)`.
pub fn second_differences(probs: &[f64]) -> Vec<f64> {
    let s = smooth3(probs);
    (1..s.len().saturating_sub(1))
        .map(|g| s[g + 1] - 2.0 * s[g] + s[g - 1])
        .collect()
}

/// Index of the largest smoothed second difference, searched over the rising
/// side of the curve: bins `1..=min(peak, len-2)`, where `peak` is the last
/// bin holding the smoothed maximum. Requires at least three bins.
pub fn knee_bin(probs: &[f64]) -> usize {
    let s = smooth3(probs);
    let d = second_differences(probs);
    // rounding noise in the smoothing must not break ties
    let tol = 1e-12 * probs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let top = s.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let peak = s.iter().rposition(|&v| v >= top - tol).unwrap_or(0);
    let last = peak.clamp(1, d.len());
    let mut best = 0;
    for i in 0..last {
        if d[i] > d[best] + tol {
            best = i;
        }
    }
    best + 1
}

/// Bins around the knee where the smoothed curve bends upward (`D > 0`),
/// as an inclusive range. `None` for degenerate histograms.
pub fn inflection_region(h: &WeightHistogram) -> Option<(usize, usize)> {
    if h.bins() < 3 || h.is_degenerate() {
        return None;
    }
    let d = second_differences(&h.probs);
    let knee = knee_bin(&h.probs);
    let (mut lo, mut hi) = (knee, knee);
    while lo > 1 && d[lo - 2] > 0.0 {
        lo -= 1;
    }
    while hi < d.len() && d[hi] > 0.0 {
        hi += 1;
    }
    Some((lo, hi))
}

/// Partition of the objects into object-blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    /// Block id of every object.
    pub assignment: Vec<usize>,
    /// Object indices of every block, ascending. Blocks are ordered by their
    /// smallest member.
    pub blocks: Vec<Vec<usize>>,
    /// Pruning threshold that produced the partition, if any.
    pub threshold: Option<f64>,
}

impl BlockPartition {
    /// Groups objects by an arbitrary labelling into canonical block order.
    pub fn from_assignment(raw: &[usize], threshold: Option<f64>) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for (i, &r) in raw.iter().enumerate() {
            let id = *remap.entry(r).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(i);
            assignment.push(id);
        }
        Self {
            assignment,
            blocks,
            threshold,
        }
    }

    /// Every object in its own block.
    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            blocks: (0..n).map(|i| vec![i]).collect(),
            threshold: None,
        }
    }

    /// Number of blocks, C.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn masses(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn mass(&self, block: usize) -> usize {
        self.blocks[block].len()
    }

    pub fn block_of(&self, object: usize) -> usize {
        self.assignment[object]
    }

    /// Checks that `assignment` and `blocks` describe the same partition of
    /// `0..n`.
    pub fn is_consistent(&self, n: usize) -> bool {
        if self.assignment.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for (b, members) in self.blocks.iter().enumerate() {
            if members.is_empty() {
                return false;
            }
            for &i in members {
                if i >= n || seen[i] || self.assignment[i] != b {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Writes `object_id,block_id` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["object_id", "block_id"])?;
        for (i, b) in self.assignment.iter().enumerate() {
            wtr.write_record([i.to_string(), b.to_string()])?;
        }
        wtr.flush().map_err(|source| OsdError::Io {
            path: "<partition writer>".into(),
            source,
        })
    }
}

/// Cuts every edge with weight strictly below `threshold` and returns the
/// connected components of the remaining graph.
pub fn divide(g: &KnnGraph, threshold: f64) -> BlockPartition {
    let n = g.count();
    let mut uf = UnionFind::new(n);
    for e in g.edges().iter().filter(|e| e.weight >= threshold) {
        uf.union(e.a, e.b);
    }
    let roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    BlockPartition::from_assignment(&roots, Some(threshold))
}

/// Full division: histogram, knee (or override) and pruning.
pub fn divide_auto(
    g: &KnnGraph,
    override_threshold: Option<f64>,
) -> Result<(BlockPartition, Knee)> {
    let h = weight_histogram(g)?;
    let knee = find_inflection(&h, override_threshold);
    Ok((divide(g, knee.threshold), knee))
}
