//! End-to-end orchestration: division, explosion and repulsion, ablation
//! variants, before/after detector evaluation, JSON reports and plot data.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{divide, find_inflection, weight_histogram, BlockPartition};
use crate::dataset::{min_max_normalize, Dataset, Labels};
use crate::detectors::{self, DetectorKind, DetectorParams};
use crate::error::{OsdError, Result};
use crate::explosion::{constant_g, explode, explode_with_bomb, ExplosionParams};
use crate::knngraph::KnnGraph;
use crate::metrics::evaluate_scores;
use crate::repulsion::{find_invalid_neighbors, repel};
use crate::synth;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Ablation variants. Each one changes exactly one stage of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    #[default]
    None,
    /// Bomb drawn uniformly from the bounding box instead of the particle
    /// centroid.
    RandomBomb,
    /// Stop after the explosion.
    NoRepulsion,
    /// Skip block division; every object is a block of mass 1.
    NoDivision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub label_col: Option<String>,
    pub explosion: ExplosionParams,
    /// Pruning threshold override (an edge weight, so usually negative).
    pub threshold: Option<f64>,
    pub normalize: bool,
    pub ablation: Ablation,
    pub detectors: Vec<DetectorKind>,
    pub detector_params: DetectorParams,
    /// Seed for every stochastic component (random bomb, Isolation Forest).
    pub seed: u64,
    pub out_report: Option<PathBuf>,
    pub out_data: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            label_col: None,
            explosion: ExplosionParams::default(),
            threshold: None,
            normalize: true,
            ablation: Ablation::None,
            detectors: DetectorKind::ALL.to_vec(),
            detector_params: DetectorParams::default(),
            seed: 0,
            out_report: None,
            out_data: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.explosion;
        if !(e.duration > 0.0 && e.duration.is_finite()) {
            return Err(OsdError::Config(format!(
                "T must be positive, got {}",
                e.duration
            )));
        }
        if !(e.friction > 0.0 && e.friction.is_finite()) {
            return Err(OsdError::Config(format!(
                "friction must be positive, got {}",
                e.friction
            )));
        }
        if e.k == Some(0) {
            return Err(OsdError::Config("k must be at least 1".into()));
        }
        if self.threshold.is_some() && self.ablation == Ablation::NoDivision {
            return Err(OsdError::Config(
                "--threshold has no effect with --ablation no-division".into(),
            ));
        }
        if let Some(t) = self.threshold {
            if !t.is_finite() {
                return Err(OsdError::Config("threshold must be finite".into()));
            }
        }
        Ok(())
    }

    /// Applies min-max normalization when enabled.
    pub fn prepare(&self, ds: &Dataset) -> Dataset {
        if self.normalize {
            min_max_normalize(ds)
        } else {
            ds.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub knn_graph: f64,
    pub division: f64,
    pub explosion: f64,
    pub repulsion: f64,
    pub total: f64,
}

/// Everything the transform learned along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub k: usize,
    pub g_constant: f64,
    /// Pruning threshold; absent under `no-division`.
    pub threshold: Option<f64>,
    pub knee_bin: Option<usize>,
    pub n_blocks: usize,
    pub masses: Vec<usize>,
    pub n_edges: usize,
    pub bomb: Vec<f64>,
    pub n_invalid_pairs: usize,
    pub warnings: Vec<String>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone)]
pub struct OsdOutput {
    /// Final positions (after repulsion, or after the explosion under
    /// `no-repulsion`).
    pub data: Dataset,
    /// Positions right after the explosion.
    pub exploded: Dataset,
    pub partition: BlockPartition,
    pub diagnostics: Diagnostics,
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Runs the transform on `ds` as given (no normalization; see
/// [`RunConfig::prepare`]). Labels are never consulted.
pub fn run_osd(ds: &Dataset, config: &RunConfig) -> Result<OsdOutput> {
    config.validate()?;
    let start = Instant::now();
    let n = ds.count();
    let params = &config.explosion;
    let k = params.resolved_k(n);
    let mut warnings = Vec::new();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let graph = KnnGraph::build(ds, k)?;
    timings.knn_graph = secs(t);

    let t = Instant::now();
    let (partition, knee_bin) = if config.ablation == Ablation::NoDivision {
        (BlockPartition::singletons(n), None)
    } else {
        let hist = weight_histogram(&graph)?;
        let knee = find_inflection(&hist, config.threshold);
        if knee.degenerate {
            warnings.push("weight histogram has fewer than 3 usable bins; nothing pruned".into());
        }
        (divide(&graph, knee.threshold), knee.bin)
    };
    debug_assert!(partition.is_consistent(n));
    timings.division = secs(t);

    let t = Instant::now();
    let mut g = constant_g(&graph);
    if g <= 0.0 {
        warnings.push("all k-th neighbor distances are zero; using G = 1".into());
        g = 1.0;
    }
    let explosion = if config.ablation == Ablation::RandomBomb {
        let (lo, hi) = ds.bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bomb = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| if b > a { rng.random_range(a..=b) } else { a })
            .collect();
        explode_with_bomb(ds, &partition, params, g, bomb)
    } else {
        explode(ds, &partition, params, g)
    };
    timings.explosion = secs(t);

    let t = Instant::now();
    let (data, n_invalid_pairs) = if config.ablation == Ablation::NoRepulsion {
        (explosion.data.clone(), 0)
    } else {
        let inv = find_invalid_neighbors(&graph, &explosion.data, &partition, k)?;
        (repel(&explosion.data, &partition, &inv, params), inv.len())
    };
    timings.repulsion = secs(t);
    timings.total = secs(start);

    let diagnostics = Diagnostics {
        k,
        g_constant: g,
        threshold: partition.threshold,
        knee_bin,
        n_blocks: partition.len(),
        masses: partition.masses(),
        n_edges: graph.edge_count(),
        bomb: explosion.bomb.clone(),
        n_invalid_pairs,
        warnings,
        timings,
    };
    Ok(OsdOutput {
        data,
        exploded: explosion.data,
        partition,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub detector: DetectorKind,
    pub auc_before: f64,
    pub ap_before: f64,
    pub auc_after: f64,
    pub ap_after: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub n_objects: usize,
    pub dim: usize,
    pub n_outliers: usize,
    pub detectors: Vec<DetectorReport>,
    /// Transform diagnostics (block count, masses, threshold, timings).
    pub osd: Option<Diagnostics>,
}

impl EvalReport {
    pub fn detector(&self, kind: DetectorKind) -> Option<&DetectorReport> {
        self.detectors.iter().find(|d| d.detector == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Runs every configured detector on `before` and `after` with identical
/// parameters and seed.
pub fn evaluate(
    before: &Dataset,
    after: &Dataset,
    labels: &Labels,
    config: &RunConfig,
) -> Result<EvalReport> {
    labels.check_aligned(before)?;
    labels.check_aligned(after)?;
    let (pos, neg) = (labels.n_outliers(), labels.n_normals());
    if pos == 0 || neg == 0 {
        return Err(OsdError::SingleClass {
            outliers: pos,
            normals: neg,
        });
    }
    let params = DetectorParams {
        seed: config.seed,
        ..config.detector_params.clone()
    };
    let detectors = config
        .detectors
        .par_iter()
        .map(|&kind| {
            let t = Instant::now();
            let b = evaluate_scores(&detectors::score(kind, before, &params)?, labels)?;
            let a = evaluate_scores(&detectors::score(kind, after, &params)?, labels)?;
            Ok(DetectorReport {
                detector: kind,
                auc_before: b.auc,
                ap_before: b.ap,
                auc_after: a.auc,
                ap_after: a.ap,
                seconds: secs(t),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        n_objects: before.count(),
        dim: before.dim(),
        n_outliers: pos,
        detectors,
        osd: None,
    })
}

/// Normalizes (if configured), transforms and evaluates in one go. Returns the
/// prepared input, the transform output and the report.
pub fn run_and_evaluate(
    raw: &Dataset,
    labels: &Labels,
    config: &RunConfig,
) -> Result<(Dataset, OsdOutput, EvalReport)> {
    let before = config.prepare(raw);
    let out = run_osd(&before, config)?;
    let mut report = evaluate(&before, &out.data, labels, config)?;
    report.osd = Some(out.diagnostics.clone());
    Ok((before, out, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: usize,
    pub n_edges: usize,
    pub n_blocks: usize,
    /// Best-of-`repeats` wall clock for the whole transform.
    pub seconds: f64,
}

/// Times the transform on generated 5-cluster 2-D datasets (5% outliers) of
/// each size.
pub fn scaling_probe(sizes: &[usize], config: &RunConfig, repeats: usize) -> Result<Vec<ProbeRow>> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(OsdError::Config("probe sizes must be ascending".into()));
    }
    sizes
        .iter()
        .map(|&n| {
            let n_out = n / 20;
            let per = (n - n_out) / 5;
            let (raw, _) = synth::gen_clusters_outliers(5, per, n - 5 * per, 2, 10.0, config.seed)?;
            let ds = config.prepare(&raw);
            let mut best = f64::INFINITY;
            let mut last = None;
            for _ in 0..repeats.max(1) {
                let t = Instant::now();
                let out = run_osd(&ds, config)?;
                best = best.min(secs(t));
                last = Some(out.diagnostics);
            }
            let d = last.expect("at least one repeat");
            Ok(ProbeRow {
                n,
                n_edges: d.n_edges,
                n_blocks: d.n_blocks,
                seconds: best,
            })
        })
        .collect()
}

/// One row of long-format plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub level: f64,
    pub metric: String,
    pub value: f64,
}

/// Writes `level,metric,value` rows.
pub fn write_tidy_csv<W: Write>(writer: W, rows: &[TidyRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|source| OsdError::Io {
        path: "<tidy writer>".into(),
        source,
    })
}

/// Writes the probe table as CSV.
pub fn write_probe_csv<W: Write>(writer: W, rows: &[ProbeRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|source| OsdError::Io {
        path: "<probe writer>".into(),
        source,
    })
}
