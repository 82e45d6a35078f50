//! Keyed normal streams.
//!
//! A 64-bit seed is expanded with SplitMix64 into a 256-bit ChaCha8 key.
//! Every coefficient family has its own ChaCha stream id: stream 0 carries
//! `X_0`, stream `j + 1` carries `X_{j,0}, X_{j,1}, ...` in order. Because the
//! streams never overlap, `X_{j,k}` is the `k`-th normal of stream `j + 1`
//! no matter how many levels are sampled or in which order.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream id of the linear coefficient `X_0`.
pub const STREAM_X0: u64 = 0;

/// Stream id of level `j`.
#[inline]
pub fn level_stream(j: u32) -> u64 {
    j as u64 + 1
}

#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under a master seed. Distinct indices give
/// unrelated keys.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut s = master ^ 0x6A09_E667_F3BC_C909;
    let a = splitmix64(&mut s);
    let mut t = a ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut t)
}

fn key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Standard normal variates of one stream of one seed.
#[derive(Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key(seed));
        rng.set_stream(stream);
        Self { rng }
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.next_normal();
        }
    }

    /// Uniform draw on `[0, 1)`; used by test harnesses that need a
    /// Bernoulli source tied to the same keyed streams.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = NormalStream::new(42, 3);
        let mut b = NormalStream::new(42, 3);
        let mut c = NormalStream::new(42, 4);
        let xa: Vec<f64> = (0..16).map(|_| a.next_normal()).collect();
        let xb: Vec<f64> = (0..16).map(|_| b.next_normal()).collect();
        let xc: Vec<f64> = (0..16).map(|_| c.next_normal()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), s.len());
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
