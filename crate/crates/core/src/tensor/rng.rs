//! Seedable, platform-independent random source.
//!
//! The generator is xoshiro256** (`rand_xoshiro::Xoshiro256StarStar`). A
//! `(seed, stream_id)` pair selects an independent substream: the two values
//! are mixed with SplitMix64 into one 64-bit key, which is then expanded into
//! the 256-bit state by `SeedableRng::seed_from_u64`. Callers that need
//! per-sample randomness derive a fresh `Rng` per sample index instead of
//! sharing one generator, so results do not depend on evaluation order.

use num_complex::Complex64;
use rand_core::{Rng as _, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256StarStar,
    seed: u64,
    stream_id: u64,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl Rng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = splitmix64(seed ^ splitmix64(stream_id.wrapping_add(0x5EED)));
        Rng {
            inner: Xoshiro256StarStar::seed_from_u64(key),
            seed,
            stream_id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A generator on another substream of the same seed.
    pub fn substream(&self, stream_id: u64) -> Rng {
        Rng::new(self.seed, stream_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (n > 0), by rejection so there is no modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    pub fn bit(&mut self) -> u8 {
        (self.next_u64() >> 63) as u8
    }

    /// Two independent standard normals by the Box–Muller transform.
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        // 1 - U lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Circularly-symmetric complex normal with unit variance, CN(0, 1).
    pub fn complex_normal(&mut self) -> Complex64 {
        let (a, b) = self.gaussian_pair();
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
