//! Seeded, stream-split random numbers.
//!
//! Every random decision in the crate draws from an [`RngStream`] identified by
//! a master seed and a 64-bit stream id. Stream ids are composed from a
//! purpose tag in the high 32 bits and an index (repetition, worker,
//! checkpoint) in the low 32 bits, so one master seed reproduces a whole run.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose tags for the high half of a stream id.
pub mod tag {
    /// Sketch construction; index = repetition.
    pub const SKETCH: u32 = 1;
    /// Sketch construction by a parallel worker; index = worker.
    pub const SKETCH_WORKER: u32 = 2;
    /// Degree-proportional draw of the sublinear algorithm.
    pub const DEGREE_DRAW: u32 = 3;
    /// Degree-proportional draws at anytime checkpoints; index = checkpoint.
    pub const ANYTIME_DRAW: u32 = 4;
    /// Monte-Carlo influence estimation.
    pub const ESTIMATE: u32 = 5;
    /// Graph generators.
    pub const GENERATE: u32 = 6;
    /// Benchmark trials; index = trial.
    pub const BENCH: u32 = 7;
}

pub fn stream_id(tag: u32, index: u32) -> u64 {
    ((tag as u64) << 32) | index as u64
}

/// A single-consumer random stream. Identical `(seed, stream_id)` pairs yield
/// identical sequences.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn tagged(seed: u64, tag: u32, index: u32) -> Self {
        Self::new(seed, stream_id(tag, index))
    }

    /// Sibling stream under the same master seed.
    pub fn derive(&self, tag: u32, index: u32) -> Self {
        Self::tagged(self.seed, tag, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Bernoulli(p). Probabilities 0 and 1 are decided without a draw.
    #[inline]
    pub fn coin(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            self.inner.random::<f64>() < p
        }
    }

    /// Uniform integer in `[0, bound)`. `bound` must be positive.
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    /// A fresh 64-bit seed for a nested generator.
    pub fn next_seed(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn unit(&mut self) -> f64 {
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
