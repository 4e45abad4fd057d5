use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CorpusKind, TokenStream};
use crate::error::{Error, Result};

pub type TokenId = u32;

pub const UNK: &str = "<unk>";
pub const EOS: &str = "<eos>";

/// Token ↔ id mapping with corpus frequencies.
///
/// Ids follow descending frequency with a lexicographic tie-break. The
/// unknown and end-of-sentence markers are always registered; when absent
/// from the text they get count 0 and the last ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    counts: Vec<u64>,
    #[serde(skip)]
    token_to_id: HashMap<String, TokenId>,
    unk: TokenId,
    eos: TokenId,
}

impl Vocabulary {
    pub fn build<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for token in tokens {
            *counts.entry(token.as_ref().to_owned()).or_default() += 1;
        }
        Self::from_counts(counts)
    }

    /// Counts each document in parallel and merges; the result does not
    /// depend on document order.
    pub fn build_from_documents<S: AsRef<str> + Sync>(documents: &[Vec<S>]) -> Result<Self> {
        let merged = documents
            .par_iter()
            .map(|doc| {
                let mut counts: HashMap<String, u64> = HashMap::new();
                for token in doc {
                    *counts.entry(token.as_ref().to_owned()).or_default() += 1;
                }
                counts
            })
            .reduce(HashMap::new, |mut a, b| {
                for (token, n) in b {
                    *a.entry(token).or_default() += n;
                }
                a
            });
        if merged.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::from_counts(merged)
    }

    pub fn from_counts(counts: HashMap<String, u64>) -> Result<Self> {
        let mut entries: Vec<(String, u64)> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for special in [UNK, EOS] {
            if !entries.iter().any(|(t, _)| t == special) {
                entries.push((special.to_owned(), 0));
            }
        }
        let (id_to_token, counts): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        Ok(Self::from_parts(id_to_token, counts))
    }

    fn from_parts(id_to_token: Vec<String>, counts: Vec<u64>) -> Self {
        let token_to_id: HashMap<String, TokenId> = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        let unk = token_to_id[UNK];
        let eos = token_to_id[EOS];
        Self {
            id_to_token,
            counts,
            token_to_id,
            unk,
            eos,
        }
    }

    /// Re-creates the lookup table after deserialization.
    pub fn rebuild_index(self) -> Self {
        Self::from_parts(self.id_to_token, self.counts)
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    /// Number of entries that actually occur in the corpus.
    pub fn word_count(&self) -> usize {
        self.counts.iter().filter(|&&n| n > 0).count()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    /// True when `token` is a word of the corpus (count ≥ 1).
    pub fn occurs(&self, token: &str) -> bool {
        self.id(token).is_some_and(|id| self.count(id) > 0)
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn count(&self, id: TokenId) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn unk_id(&self) -> TokenId {
        self.unk
    }

    pub fn eos_id(&self) -> TokenId {
        self.eos
    }

    pub fn is_special(&self, id: TokenId) -> bool {
        id == self.unk || id == self.eos
    }

    /// Maps tokens to ids; out-of-vocabulary tokens become [`UNK`].
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], source: CorpusKind) -> Result<TokenStream> {
        let ids = tokens
            .iter()
            .map(|t| self.id(t.as_ref()).unwrap_or(self.unk))
            .collect();
        TokenStream::new(ids, source)
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<&str> {
        ids.iter().map(|&id| self.token(id)).collect()
    }
}
