//! Reproducible random streams.
//!
//! Every chain owns a [`RandomStream`] derived from `(master seed, run, sample)`.
//! The derivation is counter-based: the master seed and a fixed domain tag are
//! expanded with SplitMix64 into a 256-bit ChaCha12 key, and the 64-bit ChaCha
//! stream id is `run << 32 | sample`. Two chains therefore share a key but never
//! a keystream, and the mapping does not depend on scheduling or worker count.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Domain separation tag mixed into every key ("hrla-mc\0").
const DOMAIN_TAG: u64 = 0x6872_6c61_2d6d_6300;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
}

impl RandomStream {
    /// Stream for chain `sample` of run `run` under `master_seed`.
    pub fn substream(master_seed: u64, run: u32, sample: u32) -> Self {
        let mut state = master_seed ^ DOMAIN_TAG;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream((u64::from(run) << 32) | u64::from(sample));
        Self { rng }
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.rng.sample(StandardNormal);
        }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}
