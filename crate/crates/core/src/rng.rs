//! Portable seeded randomness.
//!
//! All generators draw from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Floats take the top 53 bits of a
//! 64-bit output; bounded integers use rejection sampling. Both conversions
//! are spelled out here so outputs do not depend on a distribution crate.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

pub(crate) struct SeededRng(Xoshiro256StarStar);

impl SeededRng {
    pub(crate) fn new(seed: Seed) -> Self {
        SeededRng(Xoshiro256StarStar::seed_from_u64(seed.0))
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub(crate) fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi]` (the upper end is reached only through rounding).
    pub(crate) fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub(crate) fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform in `0..n`.
    pub(crate) fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return (v % n) as usize;
            }
        }
    }
}
