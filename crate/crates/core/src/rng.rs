//! Seeded normal draws.
//!
//! Every simulation in the crate draws its shocks from a [`NormalStream`]:
//! `ChaCha8Rng::seed_from_u64(seed)` feeding the ziggurat
//! [`StandardNormal`](rand_distr::StandardNormal) sampler. ChaCha output is
//! defined bit-for-bit independently of the platform, so the same
//! `(seed, stream)` pair always yields the same shocks.
//!
//! Independent substreams (used for Monte-Carlo blocks) come from ChaCha's
//! 64-bit stream selector: stream `k` of seed `s` never overlaps stream `j != k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn next_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl Iterator for NormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}
