//! Seed derivation. Every random stream in a run is addressed by a path of
//! integers under the master seed, so streams never depend on how many
//! draws a sibling stream consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Stream tags used under a trial seed.
pub const STREAM_PERMUTATION: u64 = 0x5157_0001;
pub const STREAM_MODEL: u64 = 0x5157_0002;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
