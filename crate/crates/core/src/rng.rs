//! Seed derivation. Every random consumer gets its own ChaCha stream keyed by
//! a per-trial seed, so results do not depend on thread scheduling or on
//! which other consumers ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TRAJECTORY_STREAM: u64 = 0;
pub const NOISE_STREAM: u64 = 1;
pub const NH_STREAM: u64 = 2;
pub const PF_STREAM: u64 = 3;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Seed of trial `index` under `base` (SplitMix64 finalizer over both).
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
