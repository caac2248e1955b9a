use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A reproducible random stream identified by `(seed, stream_index)`.
///
/// Backed by ChaCha8 with the 64-bit stream id set to `stream_index`: every
/// index selects a disjoint keystream under the same key, so trials can be
/// generated in any order on any thread.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

/// Derives the stream for trial `index` under `seed`.
pub fn derive_stream(seed: u64, index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    RngStream {
        seed,
        stream_index: index,
        rng,
    }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// One standard normal draw.
    pub fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// One draw from `N(0, variance)`.
    pub fn normal(&mut self, variance: f64) -> f64 {
        variance.sqrt() * self.std_normal()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
