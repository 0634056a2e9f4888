//! Seed plumbing. Every random stream in the crate is a `ChaCha8Rng` built from
//! a 64-bit seed, so results depend only on seeds and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TomoRng = ChaCha8Rng;

/// Odd multiplier used to spread run indices across the seed space.
pub const RUN_SEED_MULTIPLIER: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn rng_from_seed(seed: u64) -> TomoRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-run seed of a campaign: `base XOR (run_index * 0x9E3779B97F4A7C15)`.
pub fn run_seed(base: u64, run_index: u64) -> u64 {
    base ^ run_index.wrapping_mul(RUN_SEED_MULTIPLIER)
}

/// SplitMix64 finalizer; derives an independent child seed from `seed` and a
/// stream label.
pub fn child_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
