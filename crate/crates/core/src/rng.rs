//! Seed handling.
//!
//! Every randomized operation takes a `u64` seed and builds its own
//! [`ChaCha8Rng`]. When one command needs several independent streams
//! (one per sweep cell, per candidate, per mapping draw) it derives them
//! with [`sub_seed`], so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of stream `stream` from a parent seed.
///
/// `sub_seed(s, i) = splitmix64(s ^ splitmix64(i))`. Nested derivations
/// (`sub_seed(sub_seed(s, a), b)`) give a tree of independent streams.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}
