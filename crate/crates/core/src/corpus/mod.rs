//! Corpus ingestion: tokenization, vocabulary, gender defining sets, stop
//! words and sentence subsampling.

mod defining;
mod stopwords;
mod subsample;
pub mod synthetic;
mod vocab;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use defining::{DefiningSets, Gender, GenderPair};
pub use stopwords::StopWordList;
pub use subsample::subsample;
pub use vocab::{TokenId, Vocabulary, EOS, UNK};

/// Which preprocessing convention a corpus follows. Doubles as the corpus
/// label carried by a [`TokenStream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    /// Mikolov-preprocessed Penn Treebank: lowercased, one sentence per line.
    Ptb,
    /// WikiText-2: case preserved, one line per paragraph.
    #[serde(rename = "wikitext2")]
    WikiText2,
    /// CNN/Daily Mail: case preserved, one sentence per line.
    CnnDailyMail,
    /// Any other sentence-per-line text, case preserved.
    Custom,
    /// Model output. Lines separate generation seeds, not sentences, so no
    /// end-of-sentence markers are emitted.
    Generated,
}

impl CorpusKind {
    pub fn lowercases(self) -> bool {
        matches!(self, CorpusKind::Ptb)
    }

    pub fn eos_per_line(self) -> bool {
        !matches!(self, CorpusKind::Generated)
    }

    pub fn label(self) -> &'static str {
        match self {
            CorpusKind::Ptb => "ptb",
            CorpusKind::WikiText2 => "wikitext2",
            CorpusKind::CnnDailyMail => "cnn_dailymail",
            CorpusKind::Custom => "custom",
            CorpusKind::Generated => "generated",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Ordered vocabulary ids of one corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub ids: Vec<TokenId>,
    pub source: CorpusKind,
}

impl TokenStream {
    pub fn new(ids: Vec<TokenId>, source: CorpusKind) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { ids, source })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Splits raw bytes into tokens.
///
/// Whitespace runs collapse, and every line (blank ones included) ends with
/// [`EOS`] when the convention calls for it. Only the PTB convention
/// lowercases.
pub fn tokenize(raw: &[u8], kind: CorpusKind) -> Result<Vec<String>> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })?;
    let mut tokens = Vec::new();
    for line in text.lines() {
        if kind.lowercases() {
            tokens.extend(line.split_whitespace().map(str::to_lowercase));
        } else {
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        if kind.eos_per_line() {
            tokens.push(EOS.to_owned());
        }
    }
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(tokens)
}

/// Inverse of [`tokenize`] for streams it produced: end-of-sentence markers
/// become line breaks.
pub fn detokenize<S: AsRef<str>>(tokens: &[S], kind: CorpusKind) -> String {
    let mut out = String::new();
    let mut line_start = true;
    for token in tokens {
        let token = token.as_ref();
        if kind.eos_per_line() && token == EOS {
            out.push('\n');
            line_start = true;
            continue;
        }
        if !line_start {
            out.push(' ');
        }
        out.push_str(token);
        line_start = false;
    }
    if !line_start && kind.eos_per_line() {
        // A trailing partial sentence would gain a marker on re-tokenization.
        log::debug!("detokenize: stream does not end with {EOS}");
    }
    out
}

pub fn read_tokens(path: &Path, kind: CorpusKind) -> Result<Vec<String>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    tokenize(&raw, kind).map_err(|e| match e {
        Error::EmptyInput => Error::parse(path, "empty corpus"),
        other => other,
    })
}
