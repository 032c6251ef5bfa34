//! Seed splitting.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by
//! `(seed, stream)`. Sub-seeds are derived with a counter-based rule so that
//! the order in which work is scheduled never changes a result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used by the samplers.
pub mod stream {
    pub const EXCURSION: u64 = 1;
    pub const LABELS: u64 = 2;
    pub const PLANE_TREE: u64 = 3;
    pub const TREE_LABELS: u64 = 4;
    pub const BROWNIAN_PATH: u64 = 5;
    pub const RUN: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `stream` of `seed`.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_mul(0xD6E8_FEB8_6659_FD93)))
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(seed, stream))
}
