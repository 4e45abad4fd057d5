use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;

use super::lstm::{forward_logits, log_softmax, State};
use super::{GenerationConfig, Params};
use crate::corpus::{CorpusKind, TokenId, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::rng;

/// Seeds decoded together in one batch.
const SEED_CHUNK: usize = 50;

/// exp of the mean next-token negative log-likelihood, with the hidden
/// state carried over the whole stream from zero.
pub fn perplexity(params: &Params, stream: &TokenStream) -> Result<f64> {
    if stream.len() < 2 {
        return Err(Error::InvalidArgument("perplexity needs at least two tokens".into()));
    }
    const SEGMENT: usize = 256;
    let mut state = State::zeros(params, 1);
    let mut nll = 0.0;
    let predictions = stream.len() - 1;
    let mut start = 0;
    while start < predictions {
        let end = (start + SEGMENT).min(predictions);
        let logits = forward_logits(params, &stream.ids[start..end], &mut state);
        for (r, &target) in stream.ids[start + 1..end + 1].iter().enumerate() {
            let row = logits.row(r);
            nll -= log_softmax(row.as_slice().expect("standard layout"))[target as usize];
        }
        start = end;
    }
    Ok((nll / predictions as f64).exp())
}

/// Token sequences, one per generation seed: the seed token followed by
/// its sampled continuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub seeds: Vec<Vec<TokenId>>,
}

impl Generated {
    pub fn len(&self) -> usize {
        self.seeds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Continuations back to back; seed boundaries leave no token behind.
    pub fn to_stream(&self) -> Result<TokenStream> {
        TokenStream::new(self.seeds.concat(), CorpusKind::Generated)
    }

    /// Space-separated tokens, one line per seed.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for seed in &self.seeds {
            out.push_str(&vocab.decode(seed).join(" "));
            out.push('\n');
        }
        out
    }
}

fn sample(rng: &mut rng::Rng, row: &[f64]) -> TokenId {
    let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let weights: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i as TokenId;
            }
            u -= w;
        }
    }
    last as TokenId
}

fn generate_chunk(
    params: &Params,
    unigram: &WeightedIndex<u64>,
    config: &GenerationConfig,
    seeds: std::ops::Range<usize>,
) -> Vec<Vec<TokenId>> {
    let mut rngs: Vec<rng::Rng> = seeds
        .clone()
        .map(|i| rng::indexed_substream(config.seed, rng::GENERATE, i as u64))
        .collect();
    let mut out: Vec<Vec<TokenId>> = rngs
        .iter_mut()
        .map(|r| vec![unigram.sample(r) as TokenId])
        .collect();
    let mut state = State::zeros(params, out.len());
    for _ in 0..config.max_len {
        let last: Vec<TokenId> = out.iter().map(|s| *s.last().expect("seeded")).collect();
        let logits = forward_logits(params, &last, &mut state);
        for (r, seq) in out.iter_mut().enumerate() {
            let row = logits.row(r);
            seq.push(sample(&mut rngs[r], row.as_slice().expect("standard layout")));
        }
    }
    out
}

/// Multinomial sampling at temperature 1.
///
/// Seed `i` draws its first token from the corpus unigram distribution and
/// then `max_len` tokens from the model, all from its own random stream, so
/// the output does not depend on how seeds are batched or scheduled. Seeds
/// are consumed in order until `total_tokens_target` tokens exist; the last
/// one is cut to hit the target exactly.
pub fn generate(params: &Params, unigram_counts: &[u64], config: &GenerationConfig) -> Result<Generated> {
    config.validate()?;
    if unigram_counts.len() != params.vocab_size() {
        return Err(Error::DimensionMismatch {
            expected: params.vocab_size(),
            got: unigram_counts.len(),
        });
    }
    let unigram = WeightedIndex::new(unigram_counts)
        .map_err(|e| Error::InvalidArgument(format!("unigram distribution: {e}")))?;
    let per_seed = config.max_len + 1;
    let needed = config.total_tokens_target.div_ceil(per_seed).min(config.num_seeds);
    let chunks: Vec<std::ops::Range<usize>> = (0..needed)
        .step_by(SEED_CHUNK)
        .map(|s| s..(s + SEED_CHUNK).min(needed))
        .collect();
    let mut seeds: Vec<Vec<TokenId>> = chunks
        .into_par_iter()
        .map(|range| generate_chunk(params, &unigram, config, range))
        .collect::<Vec<_>>()
        .concat();
    let mut remaining = config.total_tokens_target;
    for s in &mut seeds {
        s.truncate(remaining);
        remaining -= s.len();
    }
    seeds.retain(|s| !s.is_empty());
    Ok(Generated { seeds })
}
