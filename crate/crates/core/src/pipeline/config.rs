use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::biasmeter::ContextScheme;
use crate::corpus::synthetic::SyntheticSpec;
use crate::corpus::CorpusKind;
use crate::error::{Error, Result};
use crate::langmodel::{GenerationConfig, LmConfig};

/// Where the text comes from. Either `train` (with optional `valid` and
/// `test`) or `synthetic` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub kind: CorpusKind,
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Generated in memory and split 90/5/5 by line into train, valid and test.
    pub synthetic: Option<SyntheticSpec>,
    /// Keep one sentence in `subsample` of the training text.
    pub subsample: u32,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            kind: CorpusKind::Custom,
            train: None,
            valid: None,
            test: None,
            synthetic: None,
            subsample: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: CorpusConfig,
    /// JSON pair list; the shipped list for `corpus.kind` when absent.
    pub defining_sets: Option<PathBuf>,
    /// One word per line; the shipped list for `corpus.kind` when absent.
    pub stop_words: Option<PathBuf>,
    pub schemes: Vec<ContextScheme>,
    pub lambdas: Vec<f64>,
    pub model: LmConfig,
    pub generation: GenerationConfig,
    pub out_dir: PathBuf,
    /// Replaces `model.seed` and `generation.seed`.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusConfig::default(),
            defining_sets: None,
            stop_words: None,
            schemes: vec![ContextScheme::fixed(), ContextScheme::exponential()],
            lambdas: vec![0.0, 0.1, 0.5],
            model: LmConfig::desk_scale(),
            generation: GenerationConfig::desk_scale(),
            out_dir: PathBuf::from("runs"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the extension is `.json`. Relative paths are
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, e.message()))?
        };
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let c = &mut self.corpus;
        for p in [&mut c.train, &mut c.valid, &mut c.test, &mut self.defining_sets, &mut self.stop_words]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.out_dir);
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.corpus.train, &self.corpus.synthetic) {
            (Some(_), Some(_)) => return Err(Error::Config("corpus: give either train or synthetic, not both".into())),
            (None, None) => return Err(Error::Config("corpus: train path or synthetic spec required".into())),
            _ => {}
        }
        if self.corpus.subsample == 0 {
            return Err(Error::Config("corpus.subsample must be at least 1".into()));
        }
        if self.lambdas.is_empty() {
            return Err(Error::Config("lambdas must not be empty".into()));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be finite and non-negative, got {l}")));
            }
            if self.lambdas[..i].contains(&l) {
                return Err(Error::Config(format!("lambda {l} listed twice")));
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes must not be empty".into()));
        }
        for name in ["fixed", "exponential"] {
            if self.schemes.iter().filter(|s| s.name() == name).count() > 1 {
                return Err(Error::Config(format!("at most one {name} scheme")));
            }
        }
        for s in &self.schemes {
            s.validate()?;
        }
        self.model.validate()?;
        self.generation.validate()
    }

    /// Model settings for one sweep entry.
    pub fn model_for(&self, lambda: f64) -> LmConfig {
        let mut m = self.model.clone();
        m.seed = self.seed;
        m.reg.lambda = lambda;
        m
    }

    pub fn generation_config(&self) -> GenerationConfig {
        GenerationConfig {
            seed: self.seed,
            ..self.generation.clone()
        }
    }
}
