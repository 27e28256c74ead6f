//! ROC-AUC and average precision of each detector before and after the
//! transform.

use osd::pipeline::{run_and_evaluate, RunConfig};
use osd::synth;

fn main() -> osd::Result<()> {
    let (raw, labels) = synth::gen_clusters_outliers(5, 95, 25, 2, 10.0, 0)?;
    let cfg = RunConfig {
        seed: 42,
        ..Default::default()
    };
    let (_, _, report) = run_and_evaluate(&raw, &labels, &cfg)?;
    println!(
        "{:<8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "detector", "auc", "auc'", "ap", "ap'", "secs"
    );
    for d in &report.detectors {
        println!(
            "{:<8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.3}",
            d.detector.name(),
            d.auc_before,
            d.auc_after,
            d.ap_before,
            d.ap_after,
            d.seconds
        );
    }
    Ok(())
}
