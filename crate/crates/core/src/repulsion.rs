//! Repulsion pass. After the explosion some objects gain new kNN neighbors from
//! other blocks ("invalid neighbors"). Every such pair contributes an
//! inverse-distance force on the block of the first object, and each block is
//! translated once by its resultant force.

use crate::blocks::BlockPartition;
use crate::dataset::Dataset;
use crate::error::{OsdError, Result};
use crate::explosion::{
    displacement, inverse_distance, translate_blocks, DirectionMode, ExplosionParams,
};
use crate::knngraph::{knn_lists, KnnGraph};

/// Pairs `(g, p)` where `p` entered the kNN set of `g` during the explosion
/// and lives in a different block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvalidNeighborSet {
    /// Sorted by `(g, p)`.
    pub pairs: Vec<(usize, usize)>,
    /// `per_object[g]` lists the invalid neighbors of `g`.
    pub per_object: Vec<Vec<usize>>,
}

impl InvalidNeighborSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn of(&self, g: usize) -> &[usize] {
        &self.per_object[g]
    }
}

/// Recomputes the kNN lists on the exploded data (same k, same tie rule) and
/// compares them with the original graph.
pub fn find_invalid_neighbors(
    original: &KnnGraph,
    exploded: &Dataset,
    partition: &BlockPartition,
    k: usize,
) -> Result<InvalidNeighborSet> {
    if k != original.k() {
        return Err(OsdError::KMismatch {
            graph: original.k(),
            requested: k,
        });
    }
    let n = exploded.count();
    if n != original.count() {
        return Err(OsdError::DimensionMismatch {
            expected: original.count(),
            got: n,
        });
    }
    let (after, _) = knn_lists(exploded, k);
    let mut per_object = vec![Vec::new(); n];
    let mut pairs = Vec::new();
    for g in 0..n {
        let before = original.neighbors(g);
        for &p in &after[g * k..(g + 1) * k] {
            if partition.block_of(p) != partition.block_of(g) && !before.contains(&p) {
                per_object[g].push(p);
                pairs.push((g, p));
            }
        }
        per_object[g].sort_unstable();
    }
    pairs.sort_unstable();
    Ok(InvalidNeighborSet { pairs, per_object })
}

/// Force on `g` from its invalid neighbor `p`, magnitude `1 / ‖g - p‖`.
pub fn repulsive_force(g_pos: &[f64], p_pos: &[f64], mode: DirectionMode, eps: f64) -> Vec<f64> {
    match mode {
        DirectionMode::PaperLiteral => inverse_distance(p_pos, g_pos, 1.0, eps),
        DirectionMode::Corrected => inverse_distance(g_pos, p_pos, 1.0, eps),
    }
}

/// Sum of the pair forces over every member of `block` and each of its
/// invalid neighbors.
pub fn resultant_force(
    block: usize,
    inv: &InvalidNeighborSet,
    exploded: &Dataset,
    partition: &BlockPartition,
    mode: DirectionMode,
    eps: f64,
) -> Vec<f64> {
    let mut total = vec![0.0; exploded.dim()];
    for &g in &partition.blocks[block] {
        for &p in inv.of(g) {
            let f = repulsive_force(exploded.point(g), exploded.point(p), mode, eps);
            for (t, v) in total.iter_mut().zip(f) {
                *t += v;
            }
        }
    }
    total
}

/// Translates every block by its squared resultant force over its squared
/// mass (no duration factor). Blocks without invalid neighbors stay put.
pub fn repel(
    exploded: &Dataset,
    partition: &BlockPartition,
    inv: &InvalidNeighborSet,
    params: &ExplosionParams,
) -> Dataset {
    if inv.is_empty() {
        return exploded.clone();
    }
    let eps = params.eps_scale * exploded.bbox_diagonal();
    let shifts: Vec<Vec<f64>> = (0..partition.len())
        .map(|b| {
            let f = resultant_force(b, inv, exploded, partition, params.direction_mode, eps);
            displacement(
                &f,
                1.0,
                partition.mass(b),
                params.sign_mode,
                params.friction,
            )
        })
        .collect();
    translate_blocks(exploded, partition, &shifts)
}
