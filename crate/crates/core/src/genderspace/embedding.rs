use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingRole {
    Input,
    Output,
}

impl fmt::Display for EmbeddingRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingRole::Input => "input",
            EmbeddingRole::Output => "output",
        })
    }
}

impl FromStr for EmbeddingRole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "input" => Ok(EmbeddingRole::Input),
            "output" => Ok(EmbeddingRole::Output),
            other => Err(format!("unknown embedding role {other:?}")),
        }
    }
}

/// One row per vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub rows: Array2<f64>,
    pub role: EmbeddingRole,
}

impl EmbeddingMatrix {
    pub fn new(rows: Array2<f64>, role: EmbeddingRole) -> Result<Self> {
        if let Some(i) = rows.iter().position(|x| !x.is_finite()) {
            let d = rows.ncols().max(1);
            return Err(Error::InvalidArgument(format!(
                "non-finite embedding entry at row {}, column {}",
                i / d,
                i % d
            )));
        }
        Ok(Self { rows, role })
    }

    pub fn vocab_size(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Header `V d role`, then one row of space-separated floats per id,
    /// written with nine significant digits.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
            writeln!(out, "{} {} {}", self.vocab_size(), self.dim(), self.role)?;
            for row in self.rows.rows() {
                let mut first = true;
                for x in row {
                    if !first {
                        out.write_all(b" ")?;
                    }
                    first = false;
                    write!(out, "{x:.8e}")?;
                }
                out.write_all(b"\n")?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(path, "missing header"))?
            .map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [v, d, role] = fields[..] else {
            return Err(Error::parse(path, "header must be `V d role`"));
        };
        let v: usize = v.parse().map_err(|e| Error::parse(path, format!("V: {e}")))?;
        let d: usize = d.parse().map_err(|e| Error::parse(path, format!("d: {e}")))?;
        let role: EmbeddingRole = role.parse().map_err(|e| Error::parse(path, e))?;

        let mut data = Vec::with_capacity(v * d);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let before = data.len();
            for tok in line.split_whitespace() {
                let x: f64 = tok
                    .parse()
                    .map_err(|e| Error::parse(path, format!("row {i}: {e}")))?;
                data.push(x);
            }
            if data.len() - before != d {
                return Err(Error::parse(
                    path,
                    format!("row {i} has {} values, expected {d}", data.len() - before),
                ));
            }
        }
        if data.len() != v * d {
            return Err(Error::parse(path, format!("expected {v} rows, got {}", data.len() / d.max(1))));
        }
        let rows = Array2::from_shape_vec((v, d), data).expect("shape checked");
        Self::new(rows, role)
    }
}
