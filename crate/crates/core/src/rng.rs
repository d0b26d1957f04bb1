//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a substream keyed by
//! `(seed, a, b)`, typically `(seed, size_index, trial_index)`. Keys are
//! hashed with the SplitMix64 finalizer and used to seed a ChaCha8 generator,
//! so results do not depend on the order in which trials execute.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for the key `(seed, a, b)`.
pub fn substream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let key = mix64(mix64(mix64(seed) ^ a) ^ b.rotate_left(32));
    ChaCha8Rng::seed_from_u64(key)
}

/// Standard normal variates by the Box-Muller transform on open-interval
/// uniforms. The second variate of each pair is cached.
#[derive(Debug, Clone)]
pub struct NormalSampler<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> NormalSampler<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = self.rng.sample(Open01);
        let u2: f64 = self.rng.sample(Open01);
        let radius = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * sin);
        radius * cos
    }

    pub fn sample_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.sample()).collect()
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}
