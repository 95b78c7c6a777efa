//! Counter-based seed derivation for reproducible parallel runs.
//!
//! Chain `j` of cell `i` under master seed `m` uses
//! `mix(mix(m + G·(i+1)) + G·(j+1))`, where `G = 0x9E3779B97F4A7C15` and
//! `mix` is the SplitMix64 finaliser. Every derived seed then initialises a
//! ChaCha8 stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream used by every chain and SDE path.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, cell: u64, chain: u64) -> u64 {
    let cell_key = mix64(master.wrapping_add(GOLDEN.wrapping_mul(cell.wrapping_add(1))));
    mix64(cell_key.wrapping_add(GOLDEN.wrapping_mul(chain.wrapping_add(1))))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
