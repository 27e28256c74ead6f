//! Weight histogram, knee and the resulting object-blocks on a synthetic set.

use osd::blocks::{divide_auto, weight_histogram};
use osd::dataset::min_max_normalize;
use osd::{synth, KnnGraph};

fn main() -> osd::Result<()> {
    let (raw, labels) = synth::gen_clusters_outliers(3, 100, 10, 2, 28.0, 1)?;
    let ds = min_max_normalize(&raw);
    let g = KnnGraph::build(&ds, 10)?;
    let h = weight_histogram(&g)?;
    println!(
        "{} edges, {} bins of width {:.5}",
        g.edge_count(),
        h.bins(),
        h.bin_width
    );
    for (i, p) in h.probs.iter().enumerate() {
        println!(
            "{:>3} {:>9.5} {}",
            i,
            h.bin_edges[i],
            "#".repeat((p * 20.0).round() as usize)
        );
    }

    let (part, knee) = divide_auto(&g, None)?;
    println!(
        "knee {:?}, region {:?}, threshold {:.5}",
        knee.bin, knee.region, knee.threshold
    );
    for b in 0..part.len() {
        let members: Vec<usize> = (0..ds.count()).filter(|&i| part.block_of(i) == b).collect();
        let outliers = members.iter().filter(|&&i| labels.is_outlier(i)).count();
        println!(
            "block {b:>2}: mass {:>3}, {outliers} labeled outliers",
            part.mass(b)
        );
    }
    Ok(())
}
