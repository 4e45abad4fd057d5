use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ContextScheme, CooccurrenceTable};
use crate::corpus::Gender;
use crate::error::{Error, Result};

/// P(w|g) = (c(w,g) / Σ_i c(w_i,g)) / (c(g) / Σ_i c(w_i)).
///
/// Not bounded by 1: it compares how often `word` sits next to gender `g`
/// with how common `g` is overall.
pub fn conditional_probability(table: &CooccurrenceTable, word: &str, gender: Gender) -> Result<f64> {
    let (marginal, sum_name) = match gender {
        Gender::Male => ("c(m)", "sum_i c(w_i, m)"),
        Gender::Female => ("c(f)", "sum_i c(w_i, f)"),
    };
    let c_g = table.gender_total(gender);
    if c_g == 0 {
        return Err(Error::UndefinedProbability { marginal });
    }
    let sum_g = table.gender_sum(gender);
    if sum_g <= 0.0 {
        return Err(Error::UndefinedProbability { marginal: sum_name });
    }
    if table.total_targets == 0 {
        return Err(Error::UndefinedProbability {
            marginal: "sum_i c(w_i)",
        });
    }
    let c_wg = table.count(word, gender);
    Ok((c_wg / sum_g) / (c_g as f64 / table.total_targets as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub c_wf: f64,
    pub c_wm: f64,
    pub score: f64,
}

/// Per-word bias scores for one corpus under one context scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasScoreTable {
    pub scores: BTreeMap<String, WordScore>,
    /// Candidate words never seen near one of the genders.
    pub excluded: BTreeSet<String>,
    pub scheme: ContextScheme,
    pub source: String,
}

impl BiasScoreTable {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.scores.get(word).map(|s| s.score)
    }
}

/// bias(w) = ln P(w|f) − ln P(w|m); positive means female-leaning.
///
/// Words with a zero count for either gender are excluded, not smoothed.
pub fn bias_scores(table: &CooccurrenceTable, source: impl Into<String>) -> Result<BiasScoreTable> {
    if table.cf == 0 || table.cm == 0 {
        return Err(Error::Metric(format!(
            "bias scores need both genders in the corpus (c(f) = {}, c(m) = {})",
            table.cf, table.cm
        )));
    }
    let mut scores = BTreeMap::new();
    let mut excluded = BTreeSet::new();
    for (word, c) in &table.cells {
        if c.c_wf > 0.0 && c.c_wm > 0.0 {
            let pf = conditional_probability(table, word, Gender::Female)?;
            let pm = conditional_probability(table, word, Gender::Male)?;
            // difference of logs keeps the gender swap an exact negation
            let score = pf.ln() - pm.ln();
            scores.insert(
                word.clone(),
                WordScore {
                    c_wf: c.c_wf,
                    c_wm: c.c_wm,
                    score,
                },
            );
        } else {
            excluded.insert(word.clone());
        }
    }
    Ok(BiasScoreTable {
        scores,
        excluded,
        scheme: table.scheme,
        source: source.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasSummary {
    /// Mean absolute score.
    pub mu: f64,
    /// Population standard deviation of the signed scores.
    pub sigma: f64,
    pub n: usize,
}

pub fn summarize(table: &BiasScoreTable) -> Result<BiasSummary> {
    let n = table.scores.len();
    if n == 0 {
        return Err(Error::Metric("no scored words to summarize".into()));
    }
    let nf = n as f64;
    let mu = table.scores.values().map(|s| s.score.abs()).sum::<f64>() / nf;
    let mean = table.scores.values().map(|s| s.score).sum::<f64>() / nf;
    let var = table
        .scores
        .values()
        .map(|s| (s.score - mean).powi(2))
        .sum::<f64>()
        / nf;
    Ok(BiasSummary {
        mu,
        sigma: var.sqrt(),
        n,
    })
}
