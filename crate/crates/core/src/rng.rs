//! Seeded random streams.
//!
//! Every source of randomness in a run is a [`ChaCha8Rng`] derived from a
//! master seed and a stream tag, so independent consumers never share state
//! and a `(seed, tag)` pair always reproduces the same sequence.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a list of words into one 64-bit seed.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x2545_F491_4F6C_DD1D, |acc, w| splitmix64(acc ^ splitmix64(*w)))
}

pub fn stream(master: u64, tag: u64) -> Rng {
    Rng::seed_from_u64(mix(&[master, tag]))
}

/// Draws a fresh seed from `rng` for handing to a child computation.
pub fn child_seed<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}

/// Hashes the bit patterns of a point so that equal points map to equal seeds.
pub fn point_key(x: &[f64]) -> u64 {
    let words: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
    mix(&words)
}
