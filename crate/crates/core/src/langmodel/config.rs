use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genderspace::RegularizerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub layers: usize,
    pub hidden: usize,
    /// Embedding width d; the last LSTM layer also outputs d units.
    pub embed_dim: usize,
    pub tie_weights: bool,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub bptt_len: usize,
    pub epochs: usize,
    /// Drop probability on the non-recurrent connections (layer inputs and
    /// the decoder input). Zero disables dropout.
    pub dropout: f64,
    pub seed: u64,
    /// Global gradient-norm cap applied before every SGD step.
    pub clip_norm: f64,
    /// Stop after this many epochs without a validation improvement.
    pub patience: Option<usize>,
    /// A step loss above this (or non-finite) aborts training.
    pub divergence_loss: f64,
    pub reg: RegularizerConfig,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self::desk_scale()
    }
}

impl LmConfig {
    /// Dimensions of the reference PTB model: 3 × 1150 hidden, 400-wide
    /// embeddings, learning rate 30, batch 40.
    pub fn paper_scale() -> Self {
        Self {
            layers: 3,
            hidden: 1150,
            embed_dim: 400,
            tie_weights: false,
            learning_rate: 30.0,
            batch_size: 40,
            bptt_len: 70,
            epochs: 750,
            dropout: 0.4,
            seed: 0,
            clip_norm: 0.25,
            patience: Some(10),
            divergence_loss: 1e4,
            reg: RegularizerConfig::default(),
        }
    }

    /// Small enough to train on a synthetic corpus in minutes on one core.
    /// Plain SGD on λ‖NB‖² is only stable for learning_rate · λ < 1, which
    /// rules out the reference learning rate at the λ values of interest.
    pub fn desk_scale() -> Self {
        Self {
            layers: 3,
            hidden: 64,
            embed_dim: 32,
            tie_weights: false,
            learning_rate: 2.0,
            batch_size: 10,
            bptt_len: 35,
            epochs: 20,
            dropout: 0.0,
            seed: 0,
            clip_norm: 0.25,
            patience: Some(10),
            divergence_loss: 1e4,
            reg: RegularizerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("layers", self.layers),
            ("hidden", self.hidden),
            ("embed_dim", self.embed_dim),
            ("batch_size", self.batch_size),
            ("bptt_len", self.bptt_len),
            ("epochs", self.epochs),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.clip_norm > 0.0) {
            return Err(Error::Config(format!("clip_norm must be positive, got {}", self.clip_norm)));
        }
        if !(self.divergence_loss > 0.0) {
            return Err(Error::Config("divergence_loss must be positive".into()));
        }
        self.reg.validate()
    }

    /// Input and output width of layer `l`.
    pub fn layer_dims(&self, l: usize) -> (usize, usize) {
        let input = if l == 0 { self.embed_dim } else { self.hidden };
        let output = if l + 1 == self.layers { self.embed_dim } else { self.hidden };
        (input, output)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub num_seeds: usize,
    /// Sampled tokens per seed, after the seed token itself.
    pub max_len: usize,
    /// Generation stops once this many tokens have been produced.
    pub total_tokens_target: usize,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            num_seeds: 2000,
            max_len: 500,
            total_tokens_target: 1_000_000,
            seed: 0,
        }
    }
}

impl GenerationConfig {
    pub fn desk_scale() -> Self {
        Self {
            num_seeds: 200,
            max_len: 500,
            total_tokens_target: 100_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_seeds == 0 || self.max_len == 0 || self.total_tokens_target == 0 {
            return Err(Error::Config("generation counts must be at least 1".into()));
        }
        Ok(())
    }
}
