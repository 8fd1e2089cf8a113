//! Deterministic seeding and initial conditions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Frame, SwarmParams};

/// Derive the seed for one run from the master seed and the run's grid
/// coordinates. Hashing keeps distinct runs statistically unrelated while
/// remaining reproducible from the master seed alone.
pub fn derive_run_seed(master_seed: u64, c_idx: usize, ell_idx: usize, run_idx: usize) -> u64 {
    let tag = format!("swarmtopo.run.v1:{master_seed}:{c_idx}:{ell_idx}:{run_idx}");
    let digest = Sha256::digest(tag.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// The seeded initial condition: every coordinate of every position and
/// velocity is drawn i.i.d. uniform on [-1, 1]. Positions are drawn
/// first (agent by agent, x then y), then velocities in the same order.
pub fn initial_frame(params: &SwarmParams) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut draw_pairs = |n: usize| -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| {
                let x = rng.random_range(-1.0..=1.0);
                let y = rng.random_range(-1.0..=1.0);
                [x, y]
            })
            .collect()
    };
    let positions = draw_pairs(params.n);
    let velocities = draw_pairs(params.n);
    Frame { t: 0.0, positions, velocities }
}
