//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit 64-bit seed. Independent
//! sub-streams (Monte Carlo chunks, per-entry shot noise) are derived by
//! selecting a ChaCha stream id, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Generator for `seed`, positioned on sub-stream `stream`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Combine counters into a single stream id (SplitMix64 finalizer).
pub fn mix(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
