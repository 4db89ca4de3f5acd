//! Multiplicative uniform measurement noise.
//!
//! Draws come from ChaCha8 seeded with `seed_from_u64`, so a given
//! `(seed, level)` pair produces the same bits on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    relative_level: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(relative_level: f64, seed: u64) -> Result<Self> {
        if !(relative_level.is_finite() && relative_level >= 0.0) {
            return Err(invalid(format!(
                "relative noise level must be finite and >= 0, got {relative_level}"
            )));
        }
        Ok(Self {
            relative_level,
            seed,
        })
    }

    pub fn relative_level(&self) -> f64 {
        self.relative_level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Returns `g_i (1 + δ′(2u_i − 1))` with `u_i ~ U[0, 1)`.
pub fn add_uniform_noise(g: &[f64], spec: &NoiseSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    g.iter()
        .map(|&gi| {
            let u: f64 = rng.gen();
            gi * (1.0 + spec.relative_level * (2.0 * u - 1.0))
        })
        .collect()
}
