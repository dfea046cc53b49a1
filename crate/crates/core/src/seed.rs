//! Stable 64-bit seed mixing.
//!
//! Every seed in the crate is produced by folding a list of words through the
//! SplitMix64 finalizer: `h = 0; for w in words { h = splitmix64(h ^ w) }`.
//! The constants below are part of the on-disk contract of `runs.csv`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tag for benchmark instance generation (`"INST"`).
pub const INSTANCE_DOMAIN: u64 = 0x494e_5354;
/// Domain tag for campaign run seeds (`"RUN"`).
pub const RUN_DOMAIN: u64 = 0x52_554e;
/// Domain tag for surrogate tree bootstraps (`"TREE"`).
pub const TREE_DOMAIN: u64 = 0x5452_4545;
/// Domain tag for permutation sampling (`"PERM"`).
pub const PERMUTATION_DOMAIN: u64 = 0x5045_524d;

/// SplitMix64 output function applied to `x + golden gamma`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix_words(words: &[u64]) -> u64 {
    words.iter().fold(0u64, |h, &w| splitmix64(h ^ w))
}

pub fn rng_from_words(words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_words(words))
}
