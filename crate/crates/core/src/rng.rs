//! Seeded random streams.
//!
//! All sampling goes through ChaCha8, a counter-based generator, so a
//! `(seed, stream)` pair pins every draw independently of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable hash of a sequence of words; independent of platform and compiler version.
pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |h, &w| mix(h ^ mix(w)))
}

/// Stable hash of a label such as an experiment name.
pub fn hash_str(s: &str) -> u64 {
    let words: Vec<u64> = s.bytes().map(u64::from).collect();
    hash_words(&words)
}

/// `seed XOR hash(parts)`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    seed ^ hash_words(parts)
}
