//! Word-level LSTM language model with the bias penalty in its loss.
//!
//! A stack of LSTM layers maps input embeddings (V×d) to a d-wide output
//! that is decoded against a separate V×d output embedding, or the input
//! embedding when weights are tied. Training is plain SGD with truncated
//! BPTT and global-norm clipping, all in f64.

mod checkpoint;
mod config;
mod generate;
pub mod lstm;
mod params;
mod train;

use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::Result;
use crate::genderspace::{EmbeddingMatrix, EmbeddingRole};
use crate::rng;

pub use config::{GenerationConfig, LmConfig};
pub use generate::{generate, perplexity, Generated};
pub use params::{LayerParams, Params};
pub use train::{train, Batches, EpochRecord, Penalty, TrainData, TrainReport};

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageModel {
    pub config: LmConfig,
    pub params: Params,
}

impl LanguageModel {
    /// Fresh parameters drawn from the `init` stream of `config.seed`.
    pub fn new(config: LmConfig, vocab_size: usize) -> Result<Self> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(crate::Error::EmptyInput);
        }
        let mut r = rng::substream(config.seed, rng::INIT);
        let params = Params::init(&config, vocab_size, &mut r);
        Ok(Self { config, params })
    }

    pub fn embedding(&self, role: EmbeddingRole) -> EmbeddingMatrix {
        let rows = match role {
            EmbeddingRole::Input => self.params.emb_in.clone(),
            EmbeddingRole::Output => self.params.decoder().clone(),
        };
        EmbeddingMatrix { rows, role }
    }

    pub fn save(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        checkpoint::save(self, vocab, path)
    }

    pub fn load(path: &Path) -> Result<(Self, Vocabulary)> {
        checkpoint::load(path)
    }
}
