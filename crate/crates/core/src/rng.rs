//! Seeded random generators with a splittable-seed contract.
//!
//! Concurrent tasks never share a generator. Task `i` of a computation seeded
//! with `root` draws from `task_rng(root, i)`, so the result of a parallel run
//! is identical to the serial run regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for a root seed.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Child seed for task `index`, derived by two rounds of SplitMix64.
pub fn split_seed(root: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root) ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// Generator owned by task `index` under `root`.
pub fn task_rng(root: u64, index: u64) -> SimRng {
    seeded(split_seed(root, index))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
