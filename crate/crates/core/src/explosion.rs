//! The explosion: every object-block is replaced by a particle (its centroid,
//! weighted by its object count), a virtual bomb goes off at the centroid of
//! the particles, and each block is translated rigidly by the displacement its
//! particle acquires.
//!
//! With impulse `F·T`, friction coefficient `μ` and mass `M`, a particle
//! decelerating to rest travels `F² T² / (2 μ M²)`; the default `μ = 0.5`
//! reduces this to `F² T² / M²`. The square is taken per component.

use serde::{Deserialize, Serialize};

use crate::blocks::BlockPartition;
use crate::dataset::Dataset;
use crate::knngraph::KnnGraph;

/// How the per-component square of a force is turned into a displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    /// Keep the sign of each force component, so blocks move along the
    /// force (away from the bomb).
    #[default]
    Corrected,
    /// Plain component-wise square; every displacement component is
    /// nonnegative.
    PaperLiteral,
}

/// Direction of the pairwise force in the repulsion pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionMode {
    /// Force on `g` points away from its invalid neighbor `p`.
    #[default]
    Corrected,
    /// Force on `g` points toward `p`.
    PaperLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplosionParams {
    /// Neighbor count; `None` means `min(10, N - 1)`.
    pub k: Option<usize>,
    /// Explosion duration T.
    pub duration: f64,
    /// Friction coefficient μ.
    pub friction: f64,
    pub sign_mode: SignMode,
    pub direction_mode: DirectionMode,
    /// Singularity floor as a fraction of the dataset diameter.
    pub eps_scale: f64,
}

impl Default for ExplosionParams {
    fn default() -> Self {
        Self {
            k: None,
            duration: 1.0,
            friction: 0.5,
            sign_mode: SignMode::Corrected,
            direction_mode: DirectionMode::Corrected,
            eps_scale: 1e-12,
        }
    }
}

impl ExplosionParams {
    pub fn resolved_k(&self, n: usize) -> usize {
        self.k.unwrap_or_else(|| 10.min(n.saturating_sub(1)))
    }
}

/// A block collapsed to a point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub mass: usize,
    pub block_id: usize,
}

pub fn particles_of(ds: &Dataset, p: &BlockPartition) -> Vec<Particle> {
    p.blocks
        .iter()
        .enumerate()
        .map(|(block_id, members)| {
            let mut position = vec![0.0; ds.dim()];
            for &i in members {
                for (acc, v) in position.iter_mut().zip(ds.point(i)) {
                    *acc += v;
                }
            }
            let m = members.len() as f64;
            position.iter_mut().for_each(|v| *v /= m);
            Particle {
                position,
                mass: members.len(),
                block_id,
            }
        })
        .collect()
}

/// Unweighted mean of the particle positions.
pub fn bomb_position(particles: &[Particle]) -> Vec<f64> {
    let dim = particles.first().map_or(0, |p| p.position.len());
    let mut theta = vec![0.0; dim];
    for p in particles {
        for (t, v) in theta.iter_mut().zip(&p.position) {
            *t += v;
        }
    }
    let c = particles.len() as f64;
    theta.iter_mut().for_each(|t| *t /= c);
    theta
}

/// Inverse-distance force pushing `position` away from `theta`:
/// `G (x - θ) / ‖x - θ‖²`. Zero when the two are closer than `eps`.
pub fn shock_force(position: &[f64], theta: &[f64], g: f64, eps: f64) -> Vec<f64> {
    inverse_distance(position, theta, g, eps)
}

/// `scale (a - b) / ‖a - b‖²`, zero inside the singularity floor.
pub(crate) fn inverse_distance(a: &[f64], b: &[f64], scale: f64, eps: f64) -> Vec<f64> {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n2: f64 = diff.iter().map(|v| v * v).sum();
    if n2 == 0.0 || n2.sqrt() < eps {
        return vec![0.0; a.len()];
    }
    diff.into_iter().map(|v| scale * v / n2).collect()
}

/// Mean distance from every object to its k-th nearest neighbor.
pub fn constant_g(g: &KnnGraph) -> f64 {
    let n = g.count();
    (0..n)
        .map(|i| g.kth_neighbor_distance(i).expect("index in range"))
        .sum::<f64>()
        / n as f64
}

/// Displacement `F² T² / (2 μ M²)` per component, with the sign rule of
/// `sign_mode`.
pub fn displacement(
    force: &[f64],
    duration: f64,
    mass: usize,
    sign_mode: SignMode,
    friction: f64,
) -> Vec<f64> {
    let m = mass as f64;
    let scale = duration * duration / (2.0 * friction * m * m);
    force
        .iter()
        .map(|&f| {
            let sq = f * f * scale;
            match sign_mode {
                SignMode::PaperLiteral => sq,
                SignMode::Corrected => {
                    if f < 0.0 {
                        -sq
                    } else {
                        sq
                    }
                }
            }
        })
        .collect()
}

/// Result of one explosion.
#[derive(Debug, Clone)]
pub struct Explosion {
    /// Objects after the move.
    pub data: Dataset,
    /// Particles recomputed on the moved blocks; masses are unchanged.
    pub particles: Vec<Particle>,
    pub bomb: Vec<f64>,
    pub forces: Vec<Vec<f64>>,
    pub displacements: Vec<Vec<f64>>,
}

/// Detonates the bomb at the particle centroid.
pub fn explode(ds: &Dataset, p: &BlockPartition, params: &ExplosionParams, g: f64) -> Explosion {
    let particles = particles_of(ds, p);
    let bomb = bomb_position(&particles);
    explode_at(ds, p, &particles, params, g, bomb)
}

/// Detonates the bomb at an arbitrary position.
pub fn explode_with_bomb(
    ds: &Dataset,
    p: &BlockPartition,
    params: &ExplosionParams,
    g: f64,
    bomb: Vec<f64>,
) -> Explosion {
    let particles = particles_of(ds, p);
    explode_at(ds, p, &particles, params, g, bomb)
}

fn explode_at(
    ds: &Dataset,
    p: &BlockPartition,
    particles: &[Particle],
    params: &ExplosionParams,
    g: f64,
    bomb: Vec<f64>,
) -> Explosion {
    let eps = params.eps_scale * ds.bbox_diagonal();
    let forces: Vec<Vec<f64>> = particles
        .iter()
        .map(|pt| shock_force(&pt.position, &bomb, g, eps))
        .collect();
    let displacements: Vec<Vec<f64>> = forces
        .iter()
        .zip(particles)
        .map(|(f, pt)| {
            displacement(
                f,
                params.duration,
                pt.mass,
                params.sign_mode,
                params.friction,
            )
        })
        .collect();
    let data = translate_blocks(ds, p, &displacements);
    let particles = particles_of(&data, p);
    Explosion {
        data,
        particles,
        bomb,
        forces,
        displacements,
    }
}

/// Moves every object of block `b` by `shifts[b]`.
pub fn translate_blocks(ds: &Dataset, p: &BlockPartition, shifts: &[Vec<f64>]) -> Dataset {
    let dim = ds.dim();
    let mut values = ds.as_flat().to_vec();
    for (i, row) in values.chunks_exact_mut(dim).enumerate() {
        let s = &shifts[p.block_of(i)];
        for (v, d) in row.iter_mut().zip(s) {
            *v += d;
        }
    }
    ds.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::dist;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn particle(pos: &[f64], mass: usize) -> Particle {
        Particle {
            position: pos.to_vec(),
            mass,
            block_id: 0,
        }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn two_point_block_particle() {
        let ds = Dataset::from_rows(&[[1.0, 2.0], [1.0, 3.0]]).unwrap();
        let p = BlockPartition::from_assignment(&[0, 0], None);
        let parts = particles_of(&ds, &p);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].position, vec![1.0, 2.5]);
        assert_eq!(parts[0].mass, 2);
    }

    #[test]
    fn singleton_particle_is_the_object() {
        let ds = Dataset::from_rows(&[[1.5, -2.0], [7.0, 3.0]]).unwrap();
        let parts = particles_of(&ds, &BlockPartition::singletons(2));
        assert_eq!(parts[1].position, vec![7.0, 3.0]);
        assert_eq!(parts[1].mass, 1);
    }

    #[test]
    fn random_block_centroid_matches_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<[f64; 3]> = (0..7)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let ds = Dataset::from_rows(&rows).unwrap();
        let parts = particles_of(&ds, &BlockPartition::from_assignment(&[0; 7], None));
        for c in 0..3 {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / 7.0;
            assert!((parts[0].position[c] - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn bomb_and_force_for_three_particles() {
        let parts = [
            particle(&[1.0, 1.0], 1),
            particle(&[3.0, 0.5], 1),
            particle(&[4.0, 2.0], 1),
        ];
        let theta = bomb_position(&parts);
        assert!(close(&theta, &[2.67, 1.17], 0.01));
        let f = shock_force(&parts[0].position, &theta, 5.0, 1e-12);
        assert!(close(&f, &[-2.97, -0.30], 0.01), "{f:?}");
    }

    #[test]
    fn bomb_edge_cases() {
        assert_eq!(bomb_position(&[particle(&[3.0, -1.0], 4)]), vec![3.0, -1.0]);
        let sym = [
            particle(&[1.0, 2.0], 1),
            particle(&[-1.0, -2.0], 5),
            particle(&[2.0, -3.0], 2),
            particle(&[-2.0, 3.0], 9),
        ];
        assert_eq!(bomb_position(&sym), vec![0.0, 0.0]);
    }

    #[test]
    fn force_guard_and_law() {
        assert_eq!(
            shock_force(&[1.0, 1.0], &[1.0, 1.0], 5.0, 1e-9),
            vec![0.0, 0.0]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = rng.random_range(0.1..4.0);
            let f = shock_force(&a, &b, g, 1e-12);
            let r = dist(&a, &b);
            let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((fnorm - g / r).abs() <= 1e-9 * (g / r));
            // parallel to a - b, same orientation
            let dot: f64 = f
                .iter()
                .zip(a.iter().zip(&b))
                .map(|(f, (x, y))| f * (x - y))
                .sum();
            assert!((dot - fnorm * r).abs() <= 1e-9 * fnorm * r);
        }
    }

    #[test]
    fn constant_g_collinear_and_coincident() {
        let ds = Dataset::from_rows(&[
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
            [4.0, 0.0, 0.0],
        ])
        .unwrap();
        let g = KnnGraph::build(&ds, 2).unwrap();
        // brute force: 2nd-neighbor distances are 2, 1, 1, 2
        let mut expected = 0.0;
        for i in 0..4 {
            let mut d: Vec<f64> = (0..4)
                .filter(|&j| j != i)
                .map(|j| dist(ds.point(i), ds.point(j)))
                .collect();
            d.sort_by(f64::total_cmp);
            expected += d[1];
        }
        expected /= 4.0;
        assert_eq!(expected, 1.5);
        assert_eq!(constant_g(&g), expected);

        let same = Dataset::from_rows(&[[2.0, 2.0]; 4]).unwrap();
        assert_eq!(constant_g(&KnnGraph::build(&same, 2).unwrap()), 0.0);
    }

    #[test]
    fn constant_g_random_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let vals: Vec<f64> = (0..60 * 3).map(|_| rng.random_range(0.0..10.0)).collect();
        let ds = Dataset::from_flat(vals, 3).unwrap();
        let k = 4;
        let mut total = 0.0;
        for i in 0..ds.count() {
            let mut d: Vec<f64> = (0..ds.count())
                .filter(|&j| j != i)
                .map(|j| dist(ds.point(i), ds.point(j)))
                .collect();
            d.sort_by(f64::total_cmp);
            total += d[k - 1];
        }
        let g = constant_g(&KnnGraph::build(&ds, k).unwrap());
        assert!((g - total / ds.count() as f64).abs() <= 1e-12);
    }

    #[test]
    fn displacement_conventions() {
        let s = displacement(&[3.0, 2.0, 1.0], 1.0, 3, SignMode::Corrected, 0.5);
        assert!(close(&s, &[1.0, 4.0 / 9.0, 1.0 / 9.0], 1e-15));
        let s = displacement(&[3.0, 2.0, 1.0], 1.0, 3, SignMode::PaperLiteral, 0.5);
        assert!(close(&s, &[1.0, 4.0 / 9.0, 1.0 / 9.0], 1e-15));
        assert_eq!(
            displacement(&[0.0, 0.0], 2.0, 1, SignMode::Corrected, 0.5),
            vec![0.0, 0.0]
        );
        assert_eq!(
            displacement(&[-3.0, 2.0], 1.0, 1, SignMode::PaperLiteral, 0.5),
            vec![9.0, 4.0]
        );
        assert_eq!(
            displacement(&[-3.0, 2.0], 1.0, 1, SignMode::Corrected, 0.5),
            vec![-9.0, 4.0]
        );
    }

    #[test]
    fn doubling_mass_quarters_displacement() {
        let f = [0.7, -1.3, 2.0];
        let a = displacement(&f, 1.5, 3, SignMode::Corrected, 0.5);
        let b = displacement(&f, 1.5, 6, SignMode::Corrected, 0.5);
        for (x, y) in a.iter().zip(&b) {
            assert!((x / 4.0 - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn three_object_block_translation() {
        let ds = Dataset::from_rows(&[[1.0, 4.0, 2.0], [0.0, 3.0, 5.0], [-1.0, 7.0, 2.0]]).unwrap();
        let p = BlockPartition::from_assignment(&[0, 0, 0], None);
        let s = displacement(&[3.0, 2.0, 1.0], 1.0, 3, SignMode::Corrected, 0.5);
        let moved = translate_blocks(&ds, &p, &[s]);
        assert!(close(moved.point(0), &[2.0, 40.0 / 9.0, 19.0 / 9.0], 1e-12));
        assert!(close(moved.point(1), &[1.0, 31.0 / 9.0, 46.0 / 9.0], 1e-12));
        assert!(close(moved.point(2), &[0.0, 67.0 / 9.0, 19.0 / 9.0], 1e-12));
        let parts = particles_of(&moved, &p);
        assert!(close(
            &parts[0].position,
            &[1.0, 138.0 / 27.0, 84.0 / 27.0],
            1e-12
        ));
        assert_eq!(parts[0].mass, 3);
    }

    #[test]
    fn single_block_is_a_fixed_point() {
        let ds = Dataset::from_rows(&[[0.0, 1.0], [2.0, 3.0], [5.0, -1.0]]).unwrap();
        let p = BlockPartition::from_assignment(&[0, 0, 0], None);
        let out = explode(&ds, &p, &ExplosionParams::default(), 1.0);
        assert_eq!(out.data, ds);
    }

    #[test]
    fn two_blocks_hand_computed() {
        // block 0: (0,0),(0,2) -> particle (0,1), mass 2; block 1: (4,1), mass 1
        let ds = Dataset::from_rows(&[[0.0, 0.0], [0.0, 2.0], [4.0, 1.0]]).unwrap();
        let p = BlockPartition::from_assignment(&[0, 0, 1], None);
        let g = 2.0;
        let out = explode(&ds, &p, &ExplosionParams::default(), g);
        // bomb at (2,1); forces ±G/2 along x = (∓1, 0)
        assert_eq!(out.bomb, vec![2.0, 1.0]);
        let s0 = -(1.0_f64 * 1.0) / 4.0;
        let s1 = 1.0;
        assert!(close(out.data.point(0), &[s0, 0.0], 1e-15));
        assert!(close(out.data.point(1), &[s0, 2.0], 1e-15));
        assert!(close(out.data.point(2), &[4.0 + s1, 1.0], 1e-15));
        assert_eq!(
            out.particles.iter().map(|p| p.mass).collect::<Vec<_>>(),
            vec![2, 1]
        );
    }

    #[test]
    fn rigid_translation_preserves_in_block_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vals: Vec<f64> = (0..40 * 2).map(|_| rng.random_range(0.0..1.0)).collect();
        let ds = Dataset::from_flat(vals, 2).unwrap();
        let raw: Vec<usize> = (0..40).map(|i| i % 5).collect();
        let p = BlockPartition::from_assignment(&raw, None);
        let out = explode(&ds, &p, &ExplosionParams::default(), 0.3);
        for members in &p.blocks {
            for &a in members {
                for &b in members {
                    let before = dist(ds.point(a), ds.point(b));
                    let after = dist(out.data.point(a), out.data.point(b));
                    assert!((before - after).abs() <= 1e-9);
                }
            }
        }
        assert_eq!(
            particles_of(&out.data, &p)
                .iter()
                .map(|q| q.mass)
                .collect::<Vec<_>>(),
            p.masses()
        );
    }

    #[test]
    fn light_block_ends_farther_from_bomb() {
        // mass-1 block at (-2,0), mass-20 block centered at (2,0)
        let mut rows = vec![[-2.0, 0.0]];
        for i in 0..20 {
            let a = i as f64 * std::f64::consts::TAU / 20.0;
            rows.push([2.0 + 0.01 * a.cos(), 0.01 * a.sin()]);
        }
        let ds = Dataset::from_rows(&rows).unwrap();
        let mut raw = vec![1; 21];
        raw[0] = 0;
        let p = BlockPartition::from_assignment(&raw, None);
        let out = explode(&ds, &p, &ExplosionParams::default(), 1.0);
        let theta = &out.bomb;
        let d_light = dist(out.data.point(0), theta);
        let d_heavy = dist(&out.particles[1].position, theta);
        assert!((dist(ds.point(0), theta) - 2.0).abs() < 1e-9);
        assert!(d_light > d_heavy);
    }
}
