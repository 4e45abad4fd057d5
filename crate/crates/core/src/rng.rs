//! Named random sub-streams.
//!
//! Every source of randomness (corpus subsampling, parameter init, dropout,
//! generation) draws from its own ChaCha stream keyed by the global seed and a
//! stream name, so any stage can be re-run alone and still see the same draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub const CORPUS: &str = "corpus";
pub const INIT: &str = "init";
pub const TRAIN: &str = "train";
pub const GENERATE: &str = "generate";

pub fn substream(seed: u64, name: &str) -> Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Sub-stream `index` of a named stream, e.g. one per generation seed.
pub fn indexed_substream(seed: u64, name: &str, index: u64) -> Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}
