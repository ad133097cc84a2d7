//! Seed derivation so that every trial, split and training run owns an
//! independent, reproducible random stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TaskRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of stream identifiers.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stable 64-bit hash of a string, used to fold names into seed paths.
pub fn hash_str(s: &str) -> u64 {
    // FNV-1a
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn rng(base: u64, path: &[u64]) -> TaskRng {
    ChaCha8Rng::seed_from_u64(derive(base, path))
}
