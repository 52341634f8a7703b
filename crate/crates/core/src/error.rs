use thiserror::Error;

use crate::{cone::ConeError, partition::PartitionError, problem::ProblemError};

/// Top-level error for solver runs and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("non-positive predicted reduction {value:e} for model {model} (criticality leaked past the stopping test)")]
    PredictedReduction { model: usize, value: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("initial point has dimension {got}, problem expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("{0}")]
    Experiment(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable code recorded next to failed runs.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Cone(_) => "cone",
            Error::Problem(ProblemError::Domain { .. }) => "domain",
            Error::Problem(_) => "problem",
            Error::Partition(_) => "partition_cap",
            Error::PredictedReduction { .. } => "predicted_reduction",
            Error::Config(_) => "config",
            Error::Dimension { .. } => "dimension",
            Error::Experiment(_) => "experiment",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
        }
    }
}
