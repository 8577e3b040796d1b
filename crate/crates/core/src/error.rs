use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no classifier scores present")]
    NoClassifierScores,

    #[error("threshold {name} = {value} is outside [0, 1]")]
    ThresholdOutOfRange { name: &'static str, value: f64 },

    #[error("fraction {0} is outside (0, 1]")]
    FractionOutOfRange(f64),

    #[error("unknown original user {0:?}")]
    UnknownOriginalUser(String),

    #[error("ranking does not cover original user {0:?}")]
    RankingIncomplete(String),

    #[error("curves cover different corpora ({0} vs {1} records)")]
    CurveMismatch(usize, usize),

    #[error("unreadable text")]
    UnreadableText,

    #[error("unknown metric id {0:?}")]
    UnknownMetric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero within-group variance")]
    ZeroVariance,

    #[error("contingency table has a zero marginal")]
    ZeroMarginal,

    #[error("empty sample")]
    EmptySample,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
