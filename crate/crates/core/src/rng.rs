//! Deterministic seed derivation.
//!
//! Every stochastic stage draws from a ChaCha8 stream whose 64-bit seed is
//! `splitmix64(master ^ splitmix64(stream + 1))`, where `splitmix64` is the
//! SplitMix64 finalizer (Steele, Lea and Flood). Stage streams and
//! per-run/per-worker streams use the same function with distinct stream ids,
//! so results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function applied to `x + golden gamma`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(1)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, stream))
}
