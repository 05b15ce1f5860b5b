//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (as implemented by `rand_chacha` 0.9),
//! a counter-based generator. A stream is addressed by `(seed, stream id)`;
//! the id selects ChaCha's 64-bit stream counter, so streams never overlap and
//! any task can reconstruct its generator without coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name and version of the generator; recorded in run manifests.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), stream-addressed";

pub const TAG_STATE: u8 = 1;
pub const TAG_FUZZ: u8 = 2;
pub const TAG_DISORDER: u8 = 3;
pub const TAG_METROPOLIS: u8 = 4;
pub const TAG_BOOTSTRAP: u8 = 5;
pub const TAG_ENSEMBLE: u8 = 6;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Packs a small domain tag with up to three indices into a stream id.
///
/// Layout (high to low): 8-bit tag, 16-bit `a`, 16-bit `b`, 24-bit `c`.
pub fn stream_id(tag: u8, a: u64, b: u64, c: u64) -> u64 {
    debug_assert!(a < 1 << 16 && b < 1 << 16 && c < 1 << 24);
    ((tag as u64) << 56) | ((a & 0xffff) << 40) | ((b & 0xffff) << 24) | (c & 0xff_ffff)
}
