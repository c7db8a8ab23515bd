//! Seeded random streams.
//!
//! Every stochastic routine draws from a ChaCha8 stream keyed by
//! `(seed, label)` with the stream id set to a per-item index, so results do
//! not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator, recorded in run manifests.
pub const GENERATOR: &str = "ChaCha8";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, label: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(label)));
    rng.set_stream(index);
    rng
}

/// Stable 64-bit label for a string tag (FNV-1a).
pub fn label(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Derived 64-bit seed for item `index` of stream family `(seed, label)`.
pub fn derive(seed: u64, label: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(label)) ^ splitmix64(index.wrapping_add(0x5851_f42d)))
}
