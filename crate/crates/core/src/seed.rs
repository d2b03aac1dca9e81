//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is a pure function of a 64-bit seed and
//! a small set of integer coordinates (replicate index, dyad, stream tag), so
//! results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used for all non-dyad streams.
pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a seed with an ordered list of words.
#[inline]
pub fn derive(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    for &w in words {
        h = mix64(h ^ w.wrapping_add(GOLDEN).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    h
}

/// Uniform draw in [0, 1) for the unordered dyad {i, j}.
#[inline]
pub fn dyad_uniform(edge_seed: u64, i: usize, j: usize) -> f64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let h = mix64(edge_seed ^ mix64((a as u64).wrapping_mul(GOLDEN) ^ (b as u64).rotate_left(32)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stream tags keep the sub-seeds used by one object apart.
pub mod tag {
    pub const CONFIG: u64 = 1;
    pub const EDGES: u64 = 2;
    pub const REPLICATE: u64 = 3;
    pub const RESTART: u64 = 4;
    pub const PERMUTATION: u64 = 5;
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
