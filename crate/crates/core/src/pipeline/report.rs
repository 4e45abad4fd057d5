use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::biasmeter::SummaryReport;
use crate::error::{Error, Result};

/// μ and σ of one scored corpus under one scheme; β and its intercept when
/// the corpus is generated text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
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

impl From<&SummaryReport> for Cell {
    fn from(s: &SummaryReport) -> Self {
        Self {
            mu: s.mu,
            sigma: s.sigma,
            n: s.n,
            beta: s.beta,
            intercept: s.intercept,
            n_outliers: s.n_outliers,
        }
    }
}

/// Fixed-window and infinite-context columns of one table row.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SchemeCells {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinite: Option<Cell>,
}

impl SchemeCells {
    pub fn from_summaries(summaries: &[SummaryReport]) -> Self {
        let mut cells = Self::default();
        for s in summaries {
            match s.scheme.name() {
                "fixed" => cells.fixed = Some(s.into()),
                _ => cells.infinite = Some(s.into()),
            }
        }
        cells
    }
}

/// Generated-text row for one λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    #[serde(flatten)]
    pub cells: SchemeCells,
    /// Test perplexity, or the best validation perplexity without a test set.
    pub ppl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub corpus: String,
    pub seed: u64,
    pub train: SchemeCells,
    pub rows: Vec<LambdaRow>,
}

const CSV_HEADER: [&str; 8] = [
    "lambda",
    "fixed_mu",
    "fixed_sigma",
    "fixed_beta",
    "infinite_mu",
    "infinite_sigma",
    "infinite_beta",
    "ppl",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cell_fields(c: &Option<Cell>) -> [String; 3] {
    match c {
        Some(c) => [c.mu.to_string(), c.sigma.to_string(), opt(c.beta)],
        None => Default::default(),
    }
}

impl ExperimentReport {
    pub fn row(&self, lambda: f64) -> Option<&LambdaRow> {
        self.rows.iter().find(|r| r.lambda == lambda)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The table layout: a `train` row first, then one row per λ.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        let [a, b, c] = cell_fields(&self.train.fixed);
        let [d, e, f] = cell_fields(&self.train.infinite);
        w.write_record(["train".to_owned(), a, b, c, d, e, f, String::new()])
            .expect("in-memory write");
        for row in &self.rows {
            let [a, b, c] = cell_fields(&row.cells.fixed);
            let [d, e, f] = cell_fields(&row.cells.infinite);
            w.write_record([row.lambda.to_string(), a, b, c, d, e, f, opt(row.ppl)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn write(&self, json: &Path, csv: &Path) -> Result<()> {
        std::fs::write(json, self.to_json()).map_err(|e| Error::io(json, e))?;
        std::fs::write(csv, self.to_csv()).map_err(|e| Error::io(csv, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}

/// JSON schema of [`ExperimentReport`].
pub const REPORT_SCHEMA: &str = include_str!("../../data/report.schema.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(mu: f64, beta: Option<f64>) -> Cell {
        Cell {
            mu,
            sigma: 1.0,
            n: 10,
            beta,
            intercept: beta.map(|_| 0.0),
            n_outliers: beta.map(|_| 0),
        }
    }

    #[test]
    fn csv_layout() {
        let report = ExperimentReport {
            corpus: "ptb".into(),
            seed: 0,
            train: SchemeCells {
                fixed: Some(cell(0.83, None)),
                infinite: None,
            },
            rows: vec![LambdaRow {
                lambda: 0.01,
                cells: SchemeCells {
                    fixed: Some(cell(0.63, Some(0.31))),
                    infinite: None,
                },
                ppl: Some(63.5),
            }],
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "train,0.83,1,,,,,");
        assert_eq!(lines[2], "0.01,0.63,1,0.31,,,,63.5");
        let back: ExperimentReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert!(report.row(0.01).is_some());
        assert!(report.row(0.1).is_none());
    }
}
