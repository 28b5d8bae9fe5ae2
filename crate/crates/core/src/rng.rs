//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a [`SeedRecord`]: a global seed,
//! a stream id and a starting counter. The generator is ChaCha8, which is
//! counter based, so a stream can be reconstructed from its record alone and
//! two workers never share state. Replica `r` of an ensemble always uses the
//! stream derived from `(seed, purpose, r)`, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every stream.
pub type StreamRng = ChaCha8Rng;

/// Enough information to rebuild a random stream bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
    pub counter: u128,
}

/// Purpose tags keep streams for different roles disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Disorder = 1,
    Renewal = 2,
    Regenerative = 3,
    Synthetic = 4,
}

impl SeedRecord {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeedRecord {
            seed,
            stream,
            counter: 0,
        }
    }

    /// Stream for replica `index` of a given purpose.
    pub fn for_replica(seed: u64, purpose: Purpose, index: u64) -> Self {
        SeedRecord::new(seed, stream_id(purpose as u64, index))
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.counter);
        rng
    }
}

/// Mix a purpose tag and an index into a 64-bit stream id (splitmix64 finalizer).
pub fn stream_id(tag: u64, index: u64) -> u64 {
    let mut z = tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
