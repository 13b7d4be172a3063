//! Counter-based random streams.
//!
//! Every stochastic task draws from its own [`RngStream`], identified by a
//! master seed and a stream id. A stream always produces the same sequence
//! regardless of which thread runs it or in which order tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream for a sub-task, e.g. `(realization, step)` pairs.
    pub fn derive(&self, sub: u64) -> RngStream {
        RngStream::new(self.master_seed, mix(self.stream_id, sub))
    }

    /// A new master seed derived from this stream; used to give each
    /// realization its own independent family of streams.
    pub fn derive_seed(&self, sub: u64) -> u64 {
        mix(
            self.master_seed ^ 0x5851_f42d_4c95_7f2d,
            mix(self.stream_id, sub),
        )
    }
}

/// SplitMix64 finaliser over a pair of words.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(b.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
