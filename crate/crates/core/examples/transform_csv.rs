//! CSV in, CSV out: the transform as a preprocessing step.
//!
//! `cargo run --example transform_csv -- in.csv out.csv` transforms a file;
//! without arguments a generated dataset is used.

use osd::dataset::{load_csv, save_csv};
use osd::pipeline::{run_osd, RunConfig};
use osd::synth;

fn main() -> osd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = std::env::temp_dir();
    let (input, output) = match args.as_slice() {
        [i, o] => (i.into(), o.into()),
        _ => {
            let (ds, l) = synth::gen_clusters_outliers(3, 80, 8, 2, 12.0, 2)?;
            let input = dir.join("osd_example_in.csv");
            save_csv(&input, &ds, Some(&l))?;
            (input, dir.join("osd_example_out.csv"))
        }
    };
    // the transform never sees labels; they only ride along into the output
    let label = osd::dataset::LabelColumn::Name("label".into());
    let (raw, labels) = load_csv(&input, Some(&label)).or_else(|_| load_csv(&input, None))?;
    let cfg = RunConfig::default();
    let out = run_osd(&cfg.prepare(&raw), &cfg)?;
    save_csv(&output, &out.data, labels.as_ref())?;
    let d = &out.diagnostics;
    println!("{} -> {}", input.display(), output.display());
    println!(
        "k {}, G {:.5}, {} blocks, {} invalid pairs",
        d.k, d.g_constant, d.n_blocks, d.n_invalid_pairs
    );
    println!("timings {:?}", d.timings);
    Ok(())
}
