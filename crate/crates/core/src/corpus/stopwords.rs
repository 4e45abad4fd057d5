use std::collections::BTreeSet;
use std::path::Path;

use super::{CorpusKind, DefiningSets};
use crate::error::{Error, Result};

/// Tokens never scored for bias.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWordList {
    tokens: BTreeSet<String>,
}

impl StopWordList {
    /// One token per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        let tokens = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Self { tokens }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn builtin(kind: CorpusKind) -> Self {
        Self::parse(match kind {
            CorpusKind::Ptb => include_str!("../../data/stopwords/ptb.txt"),
            CorpusKind::WikiText2 => include_str!("../../data/stopwords/wikitext2.txt"),
            CorpusKind::CnnDailyMail | CorpusKind::Custom | CorpusKind::Generated => {
                include_str!("../../data/stopwords/cnn_dailymail.txt")
            }
        })
    }

    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    /// Drops every gendered word so the list stays disjoint from the
    /// defining sets.
    pub fn excluding(mut self, sets: &DefiningSets) -> Self {
        self.tokens.retain(|t| !sets.is_gendered(t));
        self
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.contains(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}
