//! Seeded randomness.
//!
//! Every stochastic operation in the crate draws from a ChaCha8 stream seeded
//! from a caller-supplied 64-bit seed, so identical inputs give identical
//! results on every platform. Independent streams (per trial, per gridpoint,
//! per purpose) are derived by mixing the master seed with tag values through
//! splitmix64 rather than by consuming from a shared stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One splitmix64 scramble step.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed from `master` and a list of tag values.
pub(crate) fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t));
    }
    state
}

/// The crate's named PRNG, seeded directly from a 64-bit value.
pub(crate) fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
