use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 in input at byte offset {offset}")]
    Encoding { offset: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("subsample produced empty corpus")]
    EmptySubsample,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined probability: {marginal} is zero")]
    UndefinedProbability { marginal: &'static str },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("regression needs at least {needed} common words, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate regressor: training scores have zero variance")]
    DegenerateRegressor,

    #[error("degenerate gender direction: difference matrix is zero")]
    DegenerateSubspace,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at step {step} (epoch {epoch}): loss {loss}")]
    Divergence { step: usize, epoch: usize, loss: f64 },

    #[error("missing checkpoints for lambda {0:?}")]
    MissingCheckpoints(Vec<f64>),

    #[error("missing evaluations for lambda {0:?}; run evaluate first")]
    MissingEvaluations(Vec<f64>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 3 for numerical divergence, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 3,
            _ => 2,
        }
    }
}
