//! Seed lineage for reproducible, order-independent random streams.
//!
//! Every random draw in a run comes from a ChaCha stream keyed by
//! `(master seed, purpose, drop, block)`. Streams never overlap and do not
//! depend on the order in which drops or blocks are processed, so running
//! a single drop in isolation, or with any number of workers, reproduces
//! the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. The discriminant is part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Placement = 1,
    Shadowing = 3,
    ScatteringAngles = 4,
    NormChannel = 5,
    NormPilotNoise = 6,
    EvalChannel = 7,
    EvalPilotNoise = 8,
    Activation = 9,
    Oracle = 10,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedLineage {
    master: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedLineage {
    pub fn new(master: u64) -> Self {
        SeedLineage { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// 64-bit seed for `(purpose, drop, block)`.
    pub fn seed(&self, purpose: Purpose, drop: u64, block: u64) -> u64 {
        let mut state = self.master;
        let mut h = splitmix64(&mut state);
        for word in [purpose as u64, drop, block] {
            state ^= word.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ h;
            h = splitmix64(&mut state);
        }
        h
    }

    pub fn stream(&self, purpose: Purpose, drop: u64, block: u64) -> ChaCha8Rng {
        rng_from_seed(self.seed(purpose, drop, block))
    }
}

/// ChaCha8 stream expanded from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
