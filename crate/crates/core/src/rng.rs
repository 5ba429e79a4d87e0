//! Seeding. All randomness goes through ChaCha8 seeded from a 64-bit value, so
//! results are reproducible for a given seed within this implementation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed of a sweep cell: `mix(mix(mix(base) ^ delta_index) ^ trial)`.
pub fn trial_seed(base_seed: u64, delta_index: u64, trial: u64) -> u64 {
    mix64(mix64(mix64(base_seed) ^ delta_index) ^ trial)
}
