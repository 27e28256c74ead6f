//! Wall-clock growth of the transform with dataset size.

use osd::pipeline::{scaling_probe, RunConfig};

fn main() -> osd::Result<()> {
    let rows = scaling_probe(&[1000, 2000, 4000, 8000], &RunConfig::default(), 3)?;
    let base = rows[0].seconds;
    for r in &rows {
        println!(
            "N {:>5}  edges {:>6}  blocks {:>4}  {:.4}s  x{:.2}",
            r.n,
            r.n_edges,
            r.n_blocks,
            r.seconds,
            r.seconds / base
        );
    }
    Ok(())
}
