//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`Rng`], which is
//! xoshiro256++ seeded through SplitMix64 (the `seed_from_u64` expansion
//! of `rand_xoshiro`). Bounded integers use the multiply-shift mapping
//! `(u64 * bound) >> 64`, so a shuffle can be reproduced in any language
//! that implements the same two generators.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform integer in `[0, bound)`.
pub fn below(rng: &mut Rng, bound: usize) -> usize {
    debug_assert!(bound > 0);
    ((rng.next_u64() as u128 * bound as u128) >> 64) as usize
}

/// Uniform real in `[0, 1)` from the top 53 bits.
pub fn unit(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// In-place Fisher-Yates shuffle, walking from the back.
pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}
