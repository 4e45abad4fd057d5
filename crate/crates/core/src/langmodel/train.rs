use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::lstm::{forward_backward, State};
use super::{perplexity, LanguageModel, Params};
use crate::corpus::{DefiningSets, TokenId, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::genderspace::{
    add_masked_gradient, gender_subspace, masked_regularizer_value, n_mask, DifferenceMatrix, EmbeddingRole,
    GenderSubspace, RegTarget,
};
use crate::rng;

/// Which rows of which embedding matrices the penalty acts on.
#[derive(Debug, Clone)]
pub struct Penalty {
    pub lambda: f64,
    pub target: RegTarget,
    pub threshold: f64,
    /// N membership per vocabulary id.
    pub mask: Vec<bool>,
    pub pairs: Vec<(TokenId, TokenId)>,
}

impl Penalty {
    pub fn new(model: &LanguageModel, vocab: &Vocabulary, sets: &DefiningSets) -> Self {
        let reg = &model.config.reg;
        Self {
            lambda: reg.lambda,
            target: reg.target,
            threshold: reg.variance_threshold,
            mask: n_mask(vocab, sets),
            pairs: sets.id_pairs(vocab),
        }
    }

    /// The penalized embedding roles. A tied model has one matrix, so `both`
    /// collapses to the input embedding.
    pub fn roles(&self, params: &Params) -> Vec<EmbeddingRole> {
        let tied = params.emb_out.is_none();
        match self.target {
            RegTarget::Input => vec![EmbeddingRole::Input],
            RegTarget::Output if tied => vec![EmbeddingRole::Input],
            RegTarget::Output => vec![EmbeddingRole::Output],
            RegTarget::Both if tied => vec![EmbeddingRole::Input],
            RegTarget::Both => vec![EmbeddingRole::Input, EmbeddingRole::Output],
        }
    }

    /// Gender subspaces of the current target embeddings.
    pub fn subspaces(&self, params: &Params) -> Result<Vec<(EmbeddingRole, GenderSubspace)>> {
        self.roles(params)
            .into_iter()
            .map(|role| {
                let emb = embedding(params, role);
                let c = DifferenceMatrix::from_rows(emb.view(), &self.pairs)?;
                Ok((role, gender_subspace(&c, self.threshold)?))
            })
            .collect()
    }

    /// Adds 2λ·N·B·Bᵀ into `grads` for every target; returns λ‖NB‖²_F summed.
    pub fn apply(&self, params: &Params, spaces: &[(EmbeddingRole, GenderSubspace)], grads: &mut Params) -> Result<f64> {
        let mut value = 0.0;
        for (role, space) in spaces {
            let emb = embedding(params, *role);
            let grad = match role {
                EmbeddingRole::Input => &mut grads.emb_in,
                EmbeddingRole::Output => grads.emb_out.as_mut().expect("untied model"),
            };
            value += add_masked_gradient(emb.view(), &self.mask, space, self.lambda, grad.view_mut())?;
        }
        Ok(value)
    }

    /// ‖NB‖²_F (λ = 1) with freshly computed subspaces, and the k of the
    /// first target.
    pub fn measure(&self, params: &Params) -> Result<(f64, usize)> {
        let spaces = self.subspaces(params)?;
        let mut value = 0.0;
        for (role, space) in &spaces {
            value += masked_regularizer_value(embedding(params, *role).view(), &self.mask, space, 1.0)?;
        }
        Ok((value, spaces[0].1.k))
    }
}

fn embedding(params: &Params, role: EmbeddingRole) -> &ndarray::Array2<f64> {
    match role {
        EmbeddingRole::Input => &params.emb_in,
        EmbeddingRole::Output => params.decoder(),
    }
}

/// Splits a stream into `batch` contiguous columns, stored time-major.
#[derive(Debug, Clone)]
pub struct Batches {
    data: Vec<TokenId>,
    pub batch: usize,
    pub steps: usize,
}

impl Batches {
    pub fn new(stream: &TokenStream, batch: usize) -> Self {
        let steps = stream.len() / batch;
        let mut data = vec![0; steps * batch];
        for b in 0..batch {
            for t in 0..steps {
                data[t * batch + b] = stream.ids[b * steps + t];
            }
        }
        Self { data, batch, steps }
    }

    /// Input and target slices for the segment starting at `start`.
    pub fn segment(&self, start: usize, len: usize) -> (&[TokenId], &[TokenId]) {
        let len = len.min(self.steps - 1 - start);
        let b = self.batch;
        (
            &self.data[start * b..(start + len) * b],
            &self.data[(start + 1) * b..(start + 1 + len) * b],
        )
    }

    pub fn segment_starts(&self, bptt: usize) -> impl Iterator<Item = usize> {
        (0..self.steps.saturating_sub(1)).step_by(bptt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean step loss: cross-entropy plus the weighted regularizer.
    pub train_loss: f64,
    pub val_ppl: Option<f64>,
    /// ‖NB‖²_F of the target embeddings at the end of the epoch, unweighted.
    pub reg_value: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub test_ppl: Option<f64>,
    /// Seconds spent training; not part of any serialized output.
    #[serde(skip)]
    pub wall_clock: f64,
}

impl TrainReport {
    pub fn final_record(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch - 1]
    }
}

pub struct TrainData<'a> {
    pub train: &'a TokenStream,
    pub valid: Option<&'a TokenStream>,
    pub test: Option<&'a TokenStream>,
}

/// Truncated-BPTT SGD with the bias penalty.
///
/// Each step: cross-entropy gradient of one segment; C and B rebuilt from
/// the current target embeddings (every step when `refresh` is on, at the
/// start of each epoch otherwise); 2λ·N·B·Bᵀ added to the embedding
/// gradient; global-norm clipping; SGD update. Hidden state is carried
/// across segments without gradient. One JSON line per epoch goes to `log`.
pub fn train(
    model: &mut LanguageModel,
    data: &TrainData<'_>,
    vocab: &Vocabulary,
    sets: Option<&DefiningSets>,
    mut log: Option<&mut dyn Write>,
) -> Result<TrainReport> {
    let started = Instant::now();
    let config = model.config.clone();
    config.validate()?;
    if vocab.len() != model.params.vocab_size() {
        return Err(Error::DimensionMismatch {
            expected: model.params.vocab_size(),
            got: vocab.len(),
        });
    }
    if data.train.len() <= config.bptt_len * config.batch_size {
        return Err(Error::InvalidArgument(format!(
            "training stream has {} tokens; need more than bptt_len · batch_size = {}",
            data.train.len(),
            config.bptt_len * config.batch_size
        )));
    }
    let penalty = sets.map(|s| Penalty::new(model, vocab, s));
    if penalty.is_none() && config.reg.enabled && config.reg.lambda > 0.0 {
        return Err(Error::Config("the bias penalty needs defining sets".into()));
    }
    let penalty = penalty.filter(|p| !p.pairs.is_empty());
    let regularize = config.reg.enabled && penalty.is_some();
    let batches = Batches::new(data.train, config.batch_size);
    let mut dropout_rng = rng::substream(config.seed, rng::TRAIN);

    let mut records = Vec::new();
    let mut best: Option<(f64, usize, Params)> = None;
    let mut stale = 0;
    let mut step = 0;
    let mut stopped_early = false;

    for epoch in 1..=config.epochs {
        let mut state = State::zeros(&model.params, config.batch_size);
        let mut spaces = None;
        let mut loss_sum = 0.0;
        let mut n_steps = 0;
        for start in batches.segment_starts(config.bptt_len) {
            let (inputs, targets) = batches.segment(start, config.bptt_len);
            let mut out = forward_backward(
                &model.params,
                inputs,
                targets,
                &mut state,
                config.dropout,
                Some(&mut dropout_rng),
            );
            let mut loss = out.ce;
            if let Some(penalty) = penalty.as_ref().filter(|_| regularize) {
                if config.reg.refresh || spaces.is_none() {
                    spaces = Some(penalty.subspaces(&model.params)?);
                }
                loss += penalty.apply(&model.params, spaces.as_ref().expect("computed"), &mut out.grads)?;
            }
            if !loss.is_finite() || loss > config.divergence_loss {
                return Err(Error::Divergence { step, epoch, loss });
            }
            let norm = out.grads.squared_norm().sqrt();
            if norm > config.clip_norm {
                out.grads.scale(config.clip_norm / norm);
            }
            model.params.add_scaled(-config.learning_rate, &out.grads);
            if !model.params.all_finite() {
                return Err(Error::Divergence {
                    step,
                    epoch,
                    loss: f64::NAN,
                });
            }
            loss_sum += loss;
            n_steps += 1;
            step += 1;
        }

        let val_ppl = data.valid.map(|v| perplexity(&model.params, v)).transpose()?;
        let (reg_value, k) = match &penalty {
            Some(p) => p.measure(&model.params)?,
            None => (0.0, 0),
        };
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / n_steps as f64,
            val_ppl,
            reg_value,
            k,
        };
        log::info!(
            "epoch {epoch}: loss {:.4} val_ppl {:?} reg {:.4e} k {k}",
            record.train_loss,
            val_ppl,
            reg_value
        );
        if let Some(w) = log.as_mut() {
            let line = serde_json::to_string(&record).expect("record serializes");
            writeln!(w, "{line}").map_err(|e| Error::io("training log", e))?;
            w.flush().map_err(|e| Error::io("training log", e))?;
        }
        records.push(record);

        let score = val_ppl.unwrap_or(f64::NEG_INFINITY);
        match &best {
            Some((b, _, _)) if !(score < *b) && val_ppl.is_some() => stale += 1,
            _ => {
                best = Some((score, epoch, model.params.clone()));
                stale = 0;
            }
        }
        if let Some(p) = config.patience {
            if val_ppl.is_some() && stale >= p && epoch < config.epochs {
                stopped_early = true;
                break;
            }
        }
    }

    let (_, best_epoch, params) = best.expect("at least one epoch");
    model.params = params;
    let test_ppl = data.test.map(|t| perplexity(&model.params, t)).transpose()?;
    Ok(TrainReport {
        epochs: records,
        best_epoch,
        stopped_early,
        test_ppl,
        wall_clock: started.elapsed().as_secs_f64(),
    })
}
