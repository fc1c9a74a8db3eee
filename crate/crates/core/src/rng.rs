//! Seeded random number generation.
//!
//! All randomness flows through ChaCha8, a counter-based stream cipher, so a
//! `(seed, stream)` pair reproduces the same draws on every platform. Parallel
//! callers derive independent streams with [`derive_seed`] instead of sharing
//! a generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SketchRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SketchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a sub-stream label into a seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut SketchRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec(rng: &mut SketchRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

pub fn uniform(rng: &mut SketchRng) -> f64 {
    rng.random::<f64>()
}
