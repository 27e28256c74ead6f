//! LOF before and after the transform as the density ratio of two clusters
//! grows, written as tidy `level,metric,value` CSV to stdout.

use osd::detectors::DetectorKind;
use osd::pipeline::{run_and_evaluate, write_tidy_csv, RunConfig, TidyRow};
use osd::synth;

fn main() -> osd::Result<()> {
    let levels = [1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
    let cfg = RunConfig {
        detectors: vec![DetectorKind::Lof],
        ..Default::default()
    };
    let mut rows = Vec::new();
    for (level, (ds, l)) in levels.iter().zip(synth::gen_imbalance_series(&levels, 11)?) {
        let (_, _, rep) = run_and_evaluate(&ds, &l, &cfg)?;
        let d = &rep.detectors[0];
        for (metric, value) in [
            ("auc_before", d.auc_before),
            ("auc_after", d.auc_after),
            ("ap_before", d.ap_before),
            ("ap_after", d.ap_after),
        ] {
            rows.push(TidyRow {
                level: *level,
                metric: metric.into(),
                value,
            });
        }
    }
    write_tidy_csv(std::io::stdout().lock(), &rows)
}
