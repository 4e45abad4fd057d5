//! Corpus-level gender bias measurement.
//!
//! Words are scored by how much more often they occur near female defining
//! words than near male ones, under a fixed window or an exponentially
//! decaying one. Corpora are summarized by the mean absolute score (μ) and
//! the spread of the signed scores (σ). The amplification slope β compares
//! generated text with the training corpus word by word.

mod context;
mod cooccur;
mod io;
mod regression;
mod score;

pub use context::{ContextScheme, WEIGHT_FLOOR};
pub use cooccur::{count_cooccurrences, CooccurrenceTable, WordCounts};
pub use io::{read_scores_csv, write_scores_csv, SummaryReport};
pub use regression::{
    fit_amplification, fit_with_outlier_removal, ols, studentized_residuals, AmplificationFit,
    LineFit, OUTLIER_CUTOFF,
};
pub use score::{bias_scores, conditional_probability, summarize, BiasScoreTable, BiasSummary, WordScore};
