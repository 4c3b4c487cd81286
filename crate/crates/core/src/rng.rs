//! Reproducible random streams and the normal-draw interface used by the samplers.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Counter-based stream: (seed, stream_id) fixes the whole draw sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Source of Gaussian draws. `normal(sd)` returns a N(0, sd²) variate.
pub trait NormalSource {
    fn normal(&mut self, sd: f64) -> f64;
}

impl NormalSource for RngStream {
    fn normal(&mut self, sd: f64) -> f64 {
        let g: f64 = self.inner.sample(StandardNormal);
        sd * g
    }
}

/// Scripted source for tests: returns the listed values verbatim, ignoring `sd`,
/// so a test can pin matrix entries exactly. Panics when exhausted.
#[derive(Debug, Clone)]
pub struct ForcedDraws {
    values: Vec<f64>,
    pos: usize,
}

impl ForcedDraws {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, pos: 0 }
    }
}

impl NormalSource for ForcedDraws {
    fn normal(&mut self, _sd: f64) -> f64 {
        let v = *self
            .values
            .get(self.pos)
            .expect("forced draw sequence exhausted");
        self.pos += 1;
        v
    }
}

/// Source that always returns zero (noise switched off).
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NormalSource for ZeroNoise {
    fn normal(&mut self, _sd: f64) -> f64 {
        0.0
    }
}
