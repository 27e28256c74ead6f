//! The full transform against its three ablation variants, scored by LOF.

use osd::detectors::DetectorKind;
use osd::pipeline::{run_and_evaluate, Ablation, RunConfig};
use osd::synth;

fn main() -> osd::Result<()> {
    let (raw, labels) = synth::gen_clusters_outliers(5, 95, 25, 2, 10.0, 3)?;
    for ablation in [
        Ablation::None,
        Ablation::RandomBomb,
        Ablation::NoRepulsion,
        Ablation::NoDivision,
    ] {
        let cfg = RunConfig {
            ablation,
            detectors: vec![DetectorKind::Lof],
            seed: 7,
            ..Default::default()
        };
        let (_, out, report) = run_and_evaluate(&raw, &labels, &cfg)?;
        let d = &report.detectors[0];
        println!(
            "{:<13} blocks {:>4}  LOF auc {:.4} -> {:.4}  ap {:.4} -> {:.4}",
            format!("{ablation:?}"),
            out.diagnostics.n_blocks,
            d.auc_before,
            d.auc_after,
            d.ap_before,
            d.ap_after
        );
    }
    Ok(())
}
