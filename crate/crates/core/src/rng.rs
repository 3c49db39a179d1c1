//! Seeding policy. Every random stream in the crate is a ChaCha8 generator
//! seeded from a `u64`; derived seeds come from SplitMix64 mixing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator, recorded in experiment outputs.
pub const RNG_ALGORITHM: &str = "chacha8";

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `master` one SplitMix64 round at a time.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}
