//! Hand-checkable numbers for the bomb, the shock force and the per-feature
//! displacement.

use osd::explosion::{bomb_position, displacement, shock_force, Particle};
use osd::SignMode;

fn main() {
    let ps: Vec<Particle> = [[1.0, 1.0], [3.0, 0.5], [4.0, 2.0]]
        .iter()
        .enumerate()
        .map(|(i, p)| Particle {
            position: p.to_vec(),
            mass: 1,
            block_id: i,
        })
        .collect();
    let theta = bomb_position(&ps);
    println!("bomb at {theta:.3?}");
    for p in &ps {
        let f = shock_force(&p.position, &theta, 5.0, 0.0);
        println!("force on {:?}: {f:.3?}", p.position);
    }

    // a block of mass 3 pushed by F = (3, 2, 1) for T = 1
    let s = displacement(&[3.0, 2.0, 1.0], 1.0, 3, SignMode::Corrected, 0.5);
    println!("displacement of a mass-3 block: {s:.4?}");
}
