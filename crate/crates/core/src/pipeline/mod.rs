//! Experiment orchestration: corpus → bias tables → one model per λ →
//! generated text → a report shaped like the published result tables.
//!
//! Every command reads its inputs from the experiment config and the output
//! directory, and writes its results there:
//!
//! | command  | writes |
//! |----------|--------|
//! | analyze  | `train_{scheme}.csv`, `train_{scheme}.json` |
//! | train    | `{run}.ckpt`, `{run}.log.jsonl`, `{run}.train.json` |
//! | generate | `{run}.txt` |
//! | evaluate | `{run}_{scheme}.csv`, `{run}.eval.json`, then the report |
//! | report   | `report_seed{seed}.json`, `report_seed{seed}.csv` |
//!
//! where `{run}` is `lambda{λ}_seed{seed}`.

mod config;
mod report;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::biasmeter::{
    bias_scores, count_cooccurrences, fit_amplification, read_scores_csv, summarize, write_scores_csv,
    BiasScoreTable, ContextScheme, SummaryReport,
};
use crate::corpus::{self, synthetic, CorpusKind, DefiningSets, StopWordList, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::langmodel::{self, LanguageModel, TrainData, TrainReport};
use crate::rng;

pub use config::{CorpusConfig, ExperimentConfig};
pub use report::{Cell, ExperimentReport, LambdaRow, SchemeCells, REPORT_SCHEMA};

/// File stem shared by everything produced for one sweep entry.
pub fn run_stem(lambda: f64, seed: u64) -> String {
    format!("lambda{lambda}_seed{seed}")
}

/// Tokenized corpora with the word lists resolved against the training
/// vocabulary.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub kind: CorpusKind,
    pub vocab: Vocabulary,
    pub sets: DefiningSets,
    pub stops: StopWordList,
    pub train: TokenStream,
    pub valid: Option<TokenStream>,
    pub test: Option<TokenStream>,
}

fn split_lines(text: &str) -> [String; 3] {
    let lines: Vec<&str> = text.lines().collect();
    let n = lines.len();
    let (a, b) = (n * 90 / 100, n * 95 / 100);
    [&lines[..a], &lines[a..b], &lines[b..]].map(|part| part.iter().map(|l| format!("{l}\n")).collect())
}

impl Dataset {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let c = &config.corpus;
        let kind = c.kind;
        let (train, valid, test) = match (&c.synthetic, &c.train) {
            (Some(spec), _) => {
                let [tr, va, te] = split_lines(&synthetic::generate_text(spec));
                let tok = |s: &str| corpus::tokenize(s.as_bytes(), kind);
                (tok(&tr)?, tok(&va).ok(), tok(&te).ok())
            }
            (None, Some(path)) => {
                let read = |p: &Option<PathBuf>| p.as_deref().map(|p| corpus::read_tokens(p, kind)).transpose();
                (corpus::read_tokens(path, kind)?, read(&c.valid)?, read(&c.test)?)
            }
            (None, None) => return Err(Error::Config("corpus: train path or synthetic spec required".into())),
        };
        let train = if c.subsample > 1 {
            let full = Vocabulary::build(&train)?;
            let stream = full.encode(&train, kind)?;
            let mut r = rng::substream(config.seed, rng::CORPUS);
            let kept = corpus::subsample(&stream, full.eos_id(), c.subsample, &mut r)?;
            full.decode(&kept.ids).into_iter().map(str::to_owned).collect()
        } else {
            train
        };

        let vocab = Vocabulary::build(&train)?;
        let sets = match &config.defining_sets {
            Some(p) => DefiningSets::load(p, &vocab)?,
            None => DefiningSets::builtin(kind, &vocab)?,
        };
        if sets.is_empty() {
            return Err(Error::Config("no defining pair occurs in the training corpus".into()));
        }
        let stops = match &config.stop_words {
            Some(p) => StopWordList::load(p)?,
            None => StopWordList::builtin(kind),
        }
        .excluding(&sets);
        let encode = |t: &Vec<String>| vocab.encode(t, kind);
        Ok(Self {
            train: encode(&train)?,
            valid: valid.as_ref().map(encode).transpose()?,
            test: test.as_ref().map(encode).transpose()?,
            kind,
            vocab,
            sets,
            stops,
        })
    }

    /// Scores `stream` under `scheme`.
    pub fn score(&self, stream: &TokenStream, scheme: ContextScheme, source: &str) -> Result<BiasScoreTable> {
        let table = count_cooccurrences(stream, &self.vocab, &self.sets, &self.stops, scheme)?;
        bias_scores(&table, source)
    }
}

/// Per-λ evaluation result, written as `{run}.eval.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub lambda: f64,
    pub seed: u64,
    pub summaries: Vec<SummaryReport>,
    pub ppl: Option<f64>,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub data: Dataset,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let data = Dataset::load(&config)?;
        std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
        Ok(Self { config, data })
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn run_file(&self, lambda: f64, suffix: &str) -> PathBuf {
        self.out(&format!("{}{suffix}", run_stem(lambda, self.config.seed)))
    }

    pub fn checkpoint_path(&self, lambda: f64) -> PathBuf {
        self.run_file(lambda, ".ckpt")
    }

    pub fn text_path(&self, lambda: f64) -> PathBuf {
        self.run_file(lambda, ".txt")
    }

    fn train_summary_path(&self, scheme: ContextScheme) -> PathBuf {
        self.out(&format!("train_{}.json", scheme.name()))
    }

    /// Scores the training corpus under every configured scheme.
    pub fn analyze(&self) -> Result<Vec<SummaryReport>> {
        let mut out = Vec::new();
        for &scheme in &self.config.schemes {
            let table = self.data.score(&self.data.train, scheme, self.data.kind.label())?;
            let summary = SummaryReport::new(scheme, summarize(&table)?, None);
            write_scores_csv(&table, &self.out(&format!("train_{}.csv", scheme.name())))?;
            summary.write(&self.train_summary_path(scheme))?;
            log::info!("train {scheme}: mu {:.4} sigma {:.4} n {}", summary.mu, summary.sigma, summary.n);
            out.push(summary);
        }
        Ok(out)
    }

    /// Trains the model for one λ. The epoch log is flushed as it grows, so
    /// it survives a divergence.
    pub fn train(&self, lambda: f64) -> Result<TrainReport> {
        let mut model = LanguageModel::new(self.config.model_for(lambda), self.data.vocab.len())?;
        let log_path = self.run_file(lambda, ".log.jsonl");
        let mut log = BufWriter::new(File::create(&log_path).map_err(|e| Error::io(&log_path, e))?);
        let data = TrainData {
            train: &self.data.train,
            valid: self.data.valid.as_ref(),
            test: self.data.test.as_ref(),
        };
        let report = langmodel::train(&mut model, &data, &self.data.vocab, Some(&self.data.sets), Some(&mut log as &mut dyn std::io::Write))?;
        model.save(&self.data.vocab, &self.checkpoint_path(lambda))?;
        let path = self.run_file(lambda, ".train.json");
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        log::info!("lambda {lambda}: trained in {:.1}s", report.wall_clock);
        Ok(report)
    }

    /// Samples text from the λ checkpoint and writes it, one line per seed.
    pub fn generate(&self, lambda: f64) -> Result<TokenStream> {
        let path = self.checkpoint_path(lambda);
        if !path.exists() {
            return Err(Error::MissingCheckpoints(vec![lambda]));
        }
        let (model, vocab) = LanguageModel::load(&path)?;
        if vocab != self.data.vocab {
            return Err(Error::Config(format!(
                "{}: checkpoint vocabulary differs from the corpus",
                path.display()
            )));
        }
        let generated = langmodel::generate(&model.params, vocab.counts(), &self.config.generation_config())?;
        let text_path = self.text_path(lambda);
        std::fs::write(&text_path, generated.to_text(&vocab)).map_err(|e| Error::io(&text_path, e))?;
        generated.to_stream()
    }

    fn generated_stream(&self, lambda: f64) -> Result<TokenStream> {
        let path = self.text_path(lambda);
        if !path.exists() {
            return self.generate(lambda);
        }
        let tokens = corpus::read_tokens(&path, CorpusKind::Generated)?;
        self.data.vocab.encode(&tokens, CorpusKind::Generated)
    }

    fn train_table(&self, scheme: ContextScheme) -> Result<BiasScoreTable> {
        let csv = self.out(&format!("train_{}.csv", scheme.name()));
        if csv.exists() && self.train_summary_path(scheme).exists() {
            read_scores_csv(&csv, scheme, self.data.kind.label())
        } else {
            self.analyze()?;
            read_scores_csv(&csv, scheme, self.data.kind.label())
        }
    }

    fn perplexity(&self, lambda: f64) -> Result<Option<f64>> {
        let path = self.run_file(lambda, ".train.json");
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let report: TrainReport = serde_json::from_str(&text).map_err(|e| Error::parse(&path, e))?;
        Ok(report.test_ppl.or(report.final_record().val_ppl))
    }

    /// Scores generated text for each λ against the training tables. Text
    /// already in the output directory is used as is; otherwise it is
    /// generated from the checkpoint.
    pub fn evaluate(&self, lambdas: &[f64]) -> Result<Vec<EvalRecord>> {
        let missing: Vec<f64> = lambdas
            .iter()
            .copied()
            .filter(|&l| !self.text_path(l).exists() && !self.checkpoint_path(l).exists())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingCheckpoints(missing));
        }
        let train_tables = self
            .config
            .schemes
            .iter()
            .map(|&s| self.train_table(s))
            .collect::<Result<Vec<_>>>()?;
        let mut records = Vec::new();
        for &lambda in lambdas {
            let stream = self.generated_stream(lambda)?;
            let source = run_stem(lambda, self.config.seed);
            let mut summaries = Vec::new();
            for train in &train_tables {
                let table = self.data.score(&stream, train.scheme, &source)?;
                write_scores_csv(&table, &self.run_file(lambda, &format!("_{}.csv", train.scheme.name())))?;
                let fit = fit_amplification(train, &table)?;
                summaries.push(SummaryReport::new(train.scheme, summarize(&table)?, Some(fit)));
            }
            let record = EvalRecord {
                lambda,
                seed: self.config.seed,
                summaries,
                ppl: self.perplexity(lambda)?,
            };
            let path = self.run_file(lambda, ".eval.json");
            let json = serde_json::to_string_pretty(&record).expect("record serializes") + "\n";
            std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
            records.push(record);
        }
        Ok(records)
    }

    /// Assembles the report from the analyze and evaluate outputs of every λ
    /// in the sweep and writes it as JSON and CSV.
    pub fn report(&self) -> Result<ExperimentReport> {
        let mut train = Vec::new();
        for &scheme in &self.config.schemes {
            let path = self.train_summary_path(scheme);
            if !path.exists() {
                return Err(Error::Config(format!("{} missing; run analyze first", path.display())));
            }
            train.push(SummaryReport::read(&path)?);
        }
        let missing: Vec<f64> = self
            .config
            .lambdas
            .iter()
            .copied()
            .filter(|&l| !self.run_file(l, ".eval.json").exists())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingEvaluations(missing));
        }
        let mut rows = Vec::new();
        for &lambda in &self.config.lambdas {
            let path = self.run_file(lambda, ".eval.json");
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let record: EvalRecord = serde_json::from_str(&text).map_err(|e| Error::parse(&path, e))?;
            rows.push(LambdaRow {
                lambda,
                cells: SchemeCells::from_summaries(&record.summaries),
                ppl: record.ppl,
            });
        }
        let report = ExperimentReport {
            corpus: self.data.kind.label().to_owned(),
            seed: self.config.seed,
            train: SchemeCells::from_summaries(&train),
            rows,
        };
        let stem = format!("report_seed{}", self.config.seed);
        report.write(&self.out(&format!("{stem}.json")), &self.out(&format!("{stem}.csv")))?;
        Ok(report)
    }

    /// analyze, then train, evaluate and report over the whole sweep.
    pub fn run_all(&self) -> Result<ExperimentReport> {
        self.analyze()?;
        for &lambda in &self.config.lambdas {
            self.train(lambda)?;
        }
        self.evaluate(&self.config.lambdas)?;
        self.report()
    }
}
