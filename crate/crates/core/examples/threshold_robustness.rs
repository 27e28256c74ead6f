//! Sweeps the pruning threshold across the detected inflection region and
//! reports how far the outliers end up from the normal objects.

use osd::blocks::{inflection_region, weight_histogram};
use osd::dataset::{dist, min_max_normalize};
use osd::pipeline::{run_osd, RunConfig};
use osd::{synth, Dataset, KnnGraph, Labels};

fn nearest_normal(ds: &Dataset, l: &Labels) -> f64 {
    let mut best = f64::INFINITY;
    for i in (0..ds.count()).filter(|&i| l.is_outlier(i)) {
        for j in (0..ds.count()).filter(|&j| !l.is_outlier(j)) {
            best = best.min(dist(ds.point(i), ds.point(j)));
        }
    }
    best
}

fn main() -> osd::Result<()> {
    let (raw, l) = synth::gen_clusters_outliers(2, 150, 15, 2, 28.0, 10)?;
    let ds = min_max_normalize(&raw);
    let h = weight_histogram(&KnnGraph::build(&ds, 10)?)?;
    let Some((lo, hi)) = inflection_region(&h) else {
        println!("no inflection region");
        return Ok(());
    };
    println!(
        "region: bins {lo}..={hi}; outlier-normal gap before {:.4}",
        nearest_normal(&ds, &l)
    );
    for b in lo..=hi {
        let mut cfg = RunConfig {
            threshold: Some(h.bin_edges[b]),
            normalize: false,
            ..Default::default()
        };
        cfg.explosion.k = Some(10);
        let out = run_osd(&ds, &cfg)?;
        println!(
            "threshold {:>9.5}: {:>3} blocks, gap after {:.4}",
            h.bin_edges[b],
            out.diagnostics.n_blocks,
            nearest_normal(&out.data, &l)
        );
    }
    Ok(())
}
