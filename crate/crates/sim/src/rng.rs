//! Seed derivation.
//!
//! Replicate `i` of master seed `s` draws from ChaCha8 seeded with `s`
//! (via `seed_from_u64`) on stream `i`. Sub-seeds for independent stages of
//! one run come from the first output of stream `2^63 + tag`, which no
//! replicate index reaches.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

pub fn sub_seed(master_seed: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((1 << 63) | tag);
    rng.next_u64()
}
