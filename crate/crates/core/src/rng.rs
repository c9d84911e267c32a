//! Deterministic, splittable random streams.
//!
//! Every stochastic routine takes a root seed and derives one independent
//! ChaCha stream per work item, so results do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream number `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for a nested work item, e.g. one grid node of a sweep.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    substream(seed, index.wrapping_add(1 << 63)).next_u64()
}
