//! Deterministic seed derivation.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`] seeded from a
//! 64-bit value. Sub-streams (per cell, per trial, per purpose) are derived by
//! folding integer tags into the parent seed with the SplitMix64 finalizer, so
//! a result depends only on its tags and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `seed`, producing a well-mixed child seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(seed.wrapping_add(GOLDEN)), |acc, &t| {
        splitmix64(acc ^ splitmix64(t.wrapping_add(GOLDEN)))
    })
}

/// Seeded generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Purpose tags for the independent streams used by a single trial.
pub(crate) mod stream {
    pub const SIGNAL: u64 = 1;
    pub const MODULATION: u64 = 2;
    pub const INDICES: u64 = 3;
    pub const NOISE: u64 = 4;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_tag_sensitive() {
        let a = derive_seed(7, &[4, 40, 0]);
        assert_eq!(a, derive_seed(7, &[4, 40, 0]));
        assert_ne!(a, derive_seed(7, &[4, 40, 1]));
        assert_ne!(a, derive_seed(7, &[40, 4, 0]));
        assert_ne!(a, derive_seed(8, &[4, 40, 0]));
        assert_ne!(derive_seed(0, &[]), derive_seed(0, &[0]));
    }
}
