//! # osd
//!
//! A detector-agnostic preprocessing step for outlier detection. The dataset
//! is cut into *object-blocks* along the long edges of its k-nearest-neighbor
//! graph, a virtual bomb is detonated at the centroid of the block particles,
//! and every block is translated rigidly by a displacement that shrinks with
//! the square of its mass. Small blocks (outliers) travel far; large blocks
//! (clusters of normal objects) barely move. A second repulsion pass pushes
//! apart blocks that ended up in each other's neighborhoods.
//!
//! The crate also ships the evaluation harness around the transform: three
//! baseline detectors (LOF, Isolation Forest, k-th neighbor distance), ROC-AUC
//! and average precision, seeded synthetic generators and an end-to-end
//! pipeline with ablation variants.
//!
//! ```
//! use osd::{synth, pipeline::{run_osd, RunConfig}};
//!
//! let (ds, _labels) = synth::gen_clusters_outliers(2, 40, 3, 2, 12.0, 7).unwrap();
//! let out = run_osd(&ds, &RunConfig::default()).unwrap();
//! assert_eq!(out.data.count(), ds.count());
//! ```
//!
//! Each major capability has a runnable program under `examples/`; see the
//! README for the list.

pub mod blocks;
pub mod dataset;
pub mod detectors;
pub mod error;
pub mod explosion;
pub mod knngraph;
pub mod metrics;
pub mod pipeline;
pub mod repulsion;
pub mod synth;
mod union_find;

pub use blocks::{BlockPartition, WeightHistogram};
pub use dataset::{Dataset, Labels};
pub use error::{OsdError, Result};
pub use explosion::{DirectionMode, ExplosionParams, Particle, SignMode};
pub use knngraph::KnnGraph;
