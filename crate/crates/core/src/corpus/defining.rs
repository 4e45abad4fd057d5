use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusKind, TokenId, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn other(self) -> Self {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenderPair {
    pub male: String,
    pub female: String,
}

/// Gender-opposing word pairs that define the gender direction, restricted
/// to pairs whose members both occur in the training corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningSets {
    pairs: Vec<GenderPair>,
    male: BTreeSet<String>,
    female: BTreeSet<String>,
}

impl DefiningSets {
    /// Parses a JSON array of `[male, female]` string pairs. Entries are
    /// trimmed and duplicate pairs dropped with a warning.
    pub fn parse_pairs(json: &str) -> std::result::Result<Vec<GenderPair>, String> {
        let raw: Vec<Vec<String>> = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let mut pairs: Vec<GenderPair> = Vec::with_capacity(raw.len());
        for (i, entry) in raw.into_iter().enumerate() {
            let [male, female]: [String; 2] = entry
                .try_into()
                .map_err(|e: Vec<String>| format!("entry {i} has {} elements, expected 2", e.len()))?;
            let pair = GenderPair {
                male: male.trim().to_owned(),
                female: female.trim().to_owned(),
            };
            if pair.male.is_empty() || pair.female.is_empty() {
                return Err(format!("entry {i} has an empty word"));
            }
            if pairs.contains(&pair) {
                log::warn!("duplicate defining pair ({}, {}) dropped", pair.male, pair.female);
                continue;
            }
            pairs.push(pair);
        }
        Ok(pairs)
    }

    /// Keeps the pairs whose members both occur in `vocab`.
    pub fn from_pairs(pairs: Vec<GenderPair>, vocab: &Vocabulary) -> Result<Self> {
        let mut kept: Vec<GenderPair> = Vec::with_capacity(pairs.len());
        for pair in pairs {
            if !vocab.occurs(&pair.male) || !vocab.occurs(&pair.female) {
                log::info!(
                    "defining pair ({}, {}) dropped: not in training vocabulary",
                    pair.male,
                    pair.female
                );
                continue;
            }
            if kept.contains(&pair) {
                log::warn!("duplicate defining pair ({}, {}) dropped", pair.male, pair.female);
                continue;
            }
            kept.push(pair);
        }
        if kept.is_empty() {
            return Err(Error::Config(
                "no defining pair has both words in the training vocabulary".into(),
            ));
        }
        let male: BTreeSet<String> = kept.iter().map(|p| p.male.clone()).collect();
        let female: BTreeSet<String> = kept.iter().map(|p| p.female.clone()).collect();
        if let Some(both) = male.intersection(&female).next() {
            return Err(Error::Config(format!(
                "'{both}' appears as both a male and a female defining word"
            )));
        }
        Ok(Self { pairs: kept, male, female })
    }

    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let pairs = Self::parse_pairs(&text).map_err(|m| Error::parse(path, m))?;
        Self::from_pairs(pairs, vocab)
    }

    /// The per-corpus lists shipped with the crate.
    pub fn builtin_json(kind: CorpusKind) -> &'static str {
        match kind {
            CorpusKind::Ptb => include_str!("../../data/defining_sets/ptb.json"),
            CorpusKind::WikiText2 => include_str!("../../data/defining_sets/wikitext2.json"),
            CorpusKind::CnnDailyMail
            | CorpusKind::Custom
            | CorpusKind::Generated => include_str!("../../data/defining_sets/cnn_dailymail.json"),
        }
    }

    pub fn builtin(kind: CorpusKind, vocab: &Vocabulary) -> Result<Self> {
        let pairs = Self::parse_pairs(Self::builtin_json(kind))
            .map_err(|m| Error::Config(format!("builtin defining sets: {m}")))?;
        Self::from_pairs(pairs, vocab)
    }

    /// Applies the vocabulary filter again; a no-op on already filtered sets.
    pub fn refilter(&self, vocab: &Vocabulary) -> Result<Self> {
        Self::from_pairs(self.pairs.clone(), vocab)
    }

    pub fn pairs(&self) -> &[GenderPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn male_set(&self) -> &BTreeSet<String> {
        &self.male
    }

    pub fn female_set(&self) -> &BTreeSet<String> {
        &self.female
    }

    pub fn gender_of(&self, token: &str) -> Option<Gender> {
        if self.male.contains(token) {
            Some(Gender::Male)
        } else if self.female.contains(token) {
            Some(Gender::Female)
        } else {
            None
        }
    }

    pub fn is_gendered(&self, token: &str) -> bool {
        self.gender_of(token).is_some()
    }

    /// `(male_id, female_id)` per pair, in pair order.
    pub fn id_pairs(&self, vocab: &Vocabulary) -> Vec<(TokenId, TokenId)> {
        self.pairs
            .iter()
            .filter_map(|p| Some((vocab.id(&p.male)?, vocab.id(&p.female)?)))
            .collect()
    }

    /// Every defining word id, deduplicated and sorted.
    pub fn member_ids(&self, vocab: &Vocabulary) -> Vec<TokenId> {
        let mut ids: Vec<TokenId> = self
            .male
            .iter()
            .chain(self.female.iter())
            .filter_map(|t| vocab.id(t))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}
