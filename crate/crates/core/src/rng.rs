use rand::distr::{Distribution, Open01};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifies an independent random stream: a 64-bit experiment seed plus a
/// stream id (normally the replicate index).
///
/// The generator behind it is ChaCha8, which is counter based: the seed
/// selects the key and the stream id selects the nonce, so any
/// `(seed, stream_id, draw index)` triple maps to a fixed variate no matter
/// which thread or in which order the streams are consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiates the generator positioned at draw index zero.
    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng { inner }
    }
}

/// Generator for one [`RandomStream`]. Not meant to be shared between
/// threads; clone the `RandomStream` and build a new one instead.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Uniform variate on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        Open01.sample(&mut self.inner)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
