//! Seeded, splittable random streams.
//!
//! A stream is a `(seed, stream id)` pair backed by ChaCha20, whose 64-bit
//! stream counter gives independent substreams for the same key. Every Monte
//! Carlo loop derives one substream per replication and phase so results do
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Labels for the phases of a check. Used as substream labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Data = 0,
    Prior = 1,
    Posterior = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A child stream identified by `label`; distinct labels give distinct
    /// stream ids with overwhelming probability.
    pub fn substream(&self, label: u64) -> Self {
        Self {
            seed: self.seed,
            stream: mix(self.stream, label),
        }
    }

    pub fn phase(&self, phase: Phase) -> Self {
        self.substream(phase as u64)
    }

    /// A fresh 64-bit seed for handing to code that takes a plain seed.
    pub fn derive_seed(&self) -> u64 {
        mix(self.seed, self.stream)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

// SplitMix64 finalizer over a combination of the two words.
fn mix(a: u64, b: u64) -> u64 {
    let mut z = a
        .rotate_left(17)
        .wrapping_add(b.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
