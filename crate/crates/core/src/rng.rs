//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every stochastic unit of work (one noise image, one block of Monte Carlo
//! trials) draws from its own ChaCha8 stream keyed by a child seed. Child
//! seeds depend only on the parent seed and the unit index, so the output of
//! unit `k` is the same no matter which other units run or on which thread.
//!
//! The mixing function is the SplitMix64 finalizer:
//!
//! ```text
//! mix64(z):
//!     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     return z ^ (z >> 31)
//!
//! child_seed(seed, k) = mix64(seed + (k + 1) * 0x9E3779B97F4A7C15)
//! ```
//!
//! with all arithmetic wrapping modulo 2^64. The 32-byte ChaCha key for a
//! seed `s` is the little-endian concatenation of `mix64(s + i * GOLDEN)` for
//! `i = 1..=4`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` under `seed`.
#[inline]
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = mix64(seed.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
