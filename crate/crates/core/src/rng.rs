//! Portable random stream.
//!
//! All randomness comes from SplitMix64 seeded directly with the 64-bit seed
//! (state = seed). Derived draws are defined here, not delegated to `rand`,
//! so the exact sequence is stable across crate versions and easy to port:
//!
//! - `below(k)`: high 64 bits of the 128-bit product `next_u64() * k`.
//! - `unit()`: `(next_u64() >> 11) * 2^-53`, uniform on `[0, 1)`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct Stream(SplitMix64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(SplitMix64::from_seed(seed.to_le_bytes()))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..k`. `k` must be non-zero.
    pub fn below(&mut self, k: u64) -> u64 {
        debug_assert!(k > 0);
        ((self.next_u64() as u128 * k as u128) >> 64) as u64
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
