use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AmplificationFit, BiasScoreTable, BiasSummary, ContextScheme, WordScore};
use crate::error::{Error, Result};

/// Machine-readable summary of one scored corpus; the regression fields are
/// present for generated text only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub scheme: ContextScheme,
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_outliers: Option<usize>,
}

impl SummaryReport {
    pub fn new(scheme: ContextScheme, summary: BiasSummary, fit: Option<AmplificationFit>) -> Self {
        Self {
            scheme,
            mu: summary.mu,
            sigma: summary.sigma,
            n: summary.n,
            beta: fit.map(|f| f.beta),
            intercept: fit.map(|f| f.intercept),
            n_outliers: fit.map(|f| f.n_outliers),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("summary serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct Row<'a> {
    word: std::borrow::Cow<'a, str>,
    c_wf: f64,
    c_wm: f64,
    bias_score: f64,
}

/// Writes `word,c_wf,c_wm,bias_score`, one row per scored word in word order.
pub fn write_scores_csv(table: &BiasScoreTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    for (word, s) in &table.scores {
        w.serialize(Row {
            word: word.as_str().into(),
            c_wf: s.c_wf,
            c_wm: s.c_wm,
            bias_score: s.score,
        })
        .map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores_csv(path: &Path, scheme: ContextScheme, source: impl Into<String>) -> Result<BiasScoreTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let mut scores = BTreeMap::new();
    for row in r.deserialize() {
        let row: Row = row.map_err(|e| Error::parse(path, e))?;
        scores.insert(
            row.word.into_owned(),
            WordScore {
                c_wf: row.c_wf,
                c_wm: row.c_wm,
                score: row.bias_score,
            },
        );
    }
    Ok(BiasScoreTable {
        scores,
        excluded: BTreeSet::new(),
        scheme,
        source: source.into(),
    })
}
