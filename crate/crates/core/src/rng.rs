//! Reproducible random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! seed is derived from a master seed, a purpose tag, and a list of indices
//! (trial number, grid coordinates, ...). Streams for distinct
//! (purpose, indices) tuples are statistically independent, so trials can run
//! concurrently in any order and still reproduce bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keep streams for different uses disjoint even when they share
/// trial indices.
pub mod purpose {
    pub const GROUND_TRUTH: u64 = 0x47;
    pub const SAMPLE: u64 = 0x53;
    pub const EIGEN_START: u64 = 0x45;
    pub const PILOT: u64 = 0x50;
    pub const TRIAL: u64 = 0x52;
    pub const TEST: u64 = 0x54;
}

/// splitmix64 finalizer; the standard 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a stream seed from (master, purpose, indices).
pub fn stream_seed(master: u64, purpose: u64, indices: &[u64]) -> u64 {
    let mut s = mix(master ^ mix(purpose));
    for &ix in indices {
        s = mix(s ^ mix(ix));
    }
    s
}

/// ChaCha8 stream for (master, purpose, indices).
pub fn stream_rng(master: u64, purpose: u64, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, purpose, indices))
}
