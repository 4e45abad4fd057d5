use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ContextScheme;
use crate::corpus::{DefiningSets, Gender, StopWordList, TokenId, TokenStream, Vocabulary};
use crate::error::Result;

/// Stream positions per counting chunk. Fixed so the merge order, and hence
/// every floating-point sum, does not depend on the thread count.
const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    Target,
    Male,
    Female,
    Ignored,
}

/// Classifies every vocabulary id: gendered words first, then stop words
/// and markers (ignored), then candidate targets.
pub(crate) fn roles(vocab: &Vocabulary, sets: &DefiningSets, stops: &StopWordList) -> Vec<Role> {
    vocab
        .tokens()
        .iter()
        .enumerate()
        .map(|(id, token)| match sets.gender_of(token) {
            Some(Gender::Male) => Role::Male,
            Some(Gender::Female) => Role::Female,
            None if vocab.is_special(id as TokenId) || stops.contains(token) => Role::Ignored,
            None => Role::Target,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WordCounts {
    /// Weighted co-occurrence with female tokens, c(w, f).
    pub c_wf: f64,
    /// Weighted co-occurrence with male tokens, c(w, m).
    pub c_wm: f64,
    /// Occurrences of the word itself, c(w).
    pub occurrences: u64,
}

/// Gendered co-occurrence counts of one corpus under one context scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceTable {
    pub scheme: ContextScheme,
    /// Every candidate word that occurs in the stream.
    pub cells: BTreeMap<String, WordCounts>,
    /// Σ_w c(w, f)
    pub sum_cwf: f64,
    /// Σ_w c(w, m)
    pub sum_cwm: f64,
    /// Occurrences of female tokens, c(f).
    pub cf: u64,
    /// Occurrences of male tokens, c(m).
    pub cm: u64,
    /// Σ_w c(w): occurrences of candidate words.
    pub total_targets: u64,
}

impl CooccurrenceTable {
    pub fn get(&self, word: &str) -> WordCounts {
        self.cells.get(word).copied().unwrap_or_default()
    }

    pub fn count(&self, word: &str, gender: Gender) -> f64 {
        let c = self.get(word);
        match gender {
            Gender::Male => c.c_wm,
            Gender::Female => c.c_wf,
        }
    }

    pub fn gender_total(&self, gender: Gender) -> u64 {
        match gender {
            Gender::Male => self.cm,
            Gender::Female => self.cf,
        }
    }

    pub fn gender_sum(&self, gender: Gender) -> f64 {
        match gender {
            Gender::Male => self.sum_cwm,
            Gender::Female => self.sum_cwf,
        }
    }
}

#[derive(Clone)]
struct Partial {
    cwf: Vec<f64>,
    cwm: Vec<f64>,
    occurrences: Vec<u64>,
    cf: u64,
    cm: u64,
}

impl Partial {
    fn zeros(v: usize) -> Self {
        Self {
            cwf: vec![0.0; v],
            cwm: vec![0.0; v],
            occurrences: vec![0; v],
            cf: 0,
            cm: 0,
        }
    }

    fn merge(mut self, other: &Partial) -> Self {
        for (a, b) in self.cwf.iter_mut().zip(&other.cwf) {
            *a += b;
        }
        for (a, b) in self.cwm.iter_mut().zip(&other.cwm) {
            *a += b;
        }
        for (a, b) in self.occurrences.iter_mut().zip(&other.occurrences) {
            *a += b;
        }
        self.cf += other.cf;
        self.cm += other.cm;
        self
    }
}

/// Counts how often each candidate word appears near male and female tokens.
///
/// Each gendered occurrence spreads its distance weight onto the candidate
/// words around it, over the raw stream: windows cross sentence markers and
/// are truncated at the stream ends. Chunks own the gendered positions they
/// contain, so pairs are never double counted across chunk borders.
pub fn count_cooccurrences(
    stream: &TokenStream,
    vocab: &Vocabulary,
    sets: &DefiningSets,
    stops: &StopWordList,
    scheme: ContextScheme,
) -> Result<CooccurrenceTable> {
    scheme.validate()?;
    let roles = roles(vocab, sets, stops);
    let weights = scheme.weight_table();
    let ids = &stream.ids;
    let n = ids.len();
    let v = vocab.len();

    let count_chunk = |start: usize| -> Partial {
        let end = (start + CHUNK).min(n);
        let mut part = Partial::zeros(v);
        for p in start..end {
            let cells = match roles[ids[p] as usize] {
                Role::Target => {
                    part.occurrences[ids[p] as usize] += 1;
                    continue;
                }
                Role::Ignored => continue,
                Role::Male => {
                    part.cm += 1;
                    &mut part.cwm
                }
                Role::Female => {
                    part.cf += 1;
                    &mut part.cwf
                }
            };
            for (d, &w) in weights.iter().enumerate().skip(1) {
                if let Some(q) = p.checked_sub(d) {
                    let id = ids[q] as usize;
                    if roles[id] == Role::Target {
                        cells[id] += w;
                    }
                }
                if let Some(&id) = ids.get(p + d) {
                    let id = id as usize;
                    if roles[id] == Role::Target {
                        cells[id] += w;
                    }
                }
            }
        }
        part
    };

    let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let partials: Vec<Partial> = starts.par_iter().map(|&s| count_chunk(s)).collect();
    let total = partials
        .iter()
        .fold(Partial::zeros(v), |acc, p| acc.merge(p));

    let mut cells = BTreeMap::new();
    for (id, token) in vocab.tokens().iter().enumerate() {
        if total.occurrences[id] > 0 {
            cells.insert(
                token.clone(),
                WordCounts {
                    c_wf: total.cwf[id],
                    c_wm: total.cwm[id],
                    occurrences: total.occurrences[id],
                },
            );
        }
    }
    let sum_cwf = cells.values().map(|c| c.c_wf).sum();
    let sum_cwm = cells.values().map(|c| c.c_wm).sum();
    let total_targets = cells.values().map(|c| c.occurrences).sum();
    Ok(CooccurrenceTable {
        scheme,
        cells,
        sum_cwf,
        sum_cwm,
        cf: total.cf,
        cm: total.cm,
        total_targets,
    })
}
