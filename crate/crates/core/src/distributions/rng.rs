//! Reproducible random streams.
//!
//! A stream is addressed by `(seed, stream_id)`. Each address maps to an
//! independent ChaCha8 keystream, so work items can be handed their own
//! stream and run in any order without changing the draws they see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Address of one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream whose id is derived from a textual key, e.g. a simulation cell.
    pub fn keyed(seed: u64, key: &str) -> Self {
        Self::new(seed, hash_words(&[key.as_bytes()]))
    }

    /// Child stream for a sub-task (replicate, method, ...). Children of
    /// distinct parents or with distinct tags never share an id in practice.
    pub fn child(&self, tag: u64) -> Self {
        Self::new(
            self.seed,
            hash_words(&[&self.stream_id.to_le_bytes(), &tag.to_le_bytes()]),
        )
    }

    /// Child stream addressed by a label instead of an index.
    pub fn named(&self, label: &str) -> Self {
        Self::new(
            self.seed,
            hash_words(&[&self.stream_id.to_le_bytes(), label.as_bytes()]),
        )
    }

    /// A generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn hash_words(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}
