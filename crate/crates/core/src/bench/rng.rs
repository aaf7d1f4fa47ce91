//! Portable normal deviates.
//!
//! The generator is ChaCha20 (20 rounds) keyed by `seed_from_u64`, which
//! expands the 64-bit seed with PCG32 into the 256-bit key. Uniforms take the
//! top 53 bits of one `u64` output: `u = (w >> 11) · 2⁻⁵³ ∈ [0, 1)`. Normals
//! come from the Box–Muller transform on `(1 − u1, u2)`:
//! `z0 = √(−2 ln(1−u1)) cos(2π u2)`, `z1 = √(−2 ln(1−u1)) sin(2π u2)`,
//! emitted in that order. `ln`, `cos` and `sin` are the `libm` software
//! implementations, so the stream is bitwise identical on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Seeded stream of standard normal deviates.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}
