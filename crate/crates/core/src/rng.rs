//! Reproducible uniform streams.
//!
//! A stream is addressed by `(seed, stream_id)`: the seed keys a ChaCha8
//! generator and the id selects one of its 2^64 independent streams. The
//! estimators open stream `j` for sample `j` and draw the component uniforms
//! from it in component order, so the values a sample sees do not depend on
//! which worker processes it.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Infinite sequence of uniforms in the open interval `(0, 1)`.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        StreamFactory::new(seed).stream(stream_id)
    }

    /// Next uniform; 53 random bits centred in their cell, never 0 or 1.
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }
}

/// Opens streams for one seed without re-deriving the key each time.
#[derive(Clone, Debug)]
pub struct StreamFactory {
    key: <ChaCha8Rng as SeedableRng>::Seed,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            key: ChaCha8Rng::seed_from_u64(seed).get_seed(),
        }
    }

    pub fn stream(&self, stream_id: u64) -> RandomStream {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream_id);
        RandomStream { rng }
    }
}

/// Child seed for a labelled sub-experiment (threshold index, θ value, ...).
///
/// Derived from the top of the stream-id space, which sample streams never
/// reach.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - label);
    rng.next_u64()
}
