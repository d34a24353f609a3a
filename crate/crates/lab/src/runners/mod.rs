//! One runner per CLI command, plus the structural checks bundled into
//! `selftest`.

mod counterexample;
mod cover;
mod jin;
mod structure;
mod thm2;
mod walk;

pub use counterexample::run_counterexample;
pub use cover::run_cover_greedy;
pub use jin::run_jin_verify;
pub use structure::{run_free_structure, run_ergodicity, run_matrix_means, run_pigeonhole, run_selftest};
pub use thm2::run_thm2_bound;
pub use walk::run_walk_density;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use prodset_core::bitset::BitSet;

/// Seed, worker count and config shared by all runners.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub jobs: usize,
}

/// A subset of `0..n` of measure at least `min`: each element kept with a
/// probability drawn from `[min, max]`, redrawn until the floor is met.
pub(crate) fn random_subset(rng: &mut ChaCha8Rng, n: usize, min: f64, max: f64) -> BitSet {
    let need = (min * n as f64).ceil().max(1.0) as usize;
    loop {
        let p = rng.gen_range(min..=max.max(min));
        let s = BitSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(p)));
        if s.count() >= need {
            return s;
        }
    }
}
