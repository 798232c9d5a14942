//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Error`]. The variants that matter in
//! practice are `NonFiniteEval`, which pins down exactly which oracle call
//! produced a NaN/inf during gradient estimation, and `Parse`, which carries
//! line/column positions for LIBSVM input.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of its legal range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A stochastic oracle returned NaN or infinity. The indices identify the
    /// realization and direction being processed when it happened.
    #[error(
        "non-finite oracle value {value} at realization {zeta_index}, direction {dir_index} \
         (x = {x:?})"
    )]
    NonFiniteEval {
        value: f64,
        zeta_index: usize,
        dir_index: usize,
        x: Vec<f64>,
    },

    /// Caller broke a documented precondition of an API that cannot recover.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An operation needs more per-realization gradients than it was given.
    #[error("need at least {needed} realizations, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Problem name not present in the registry.
    #[error("unknown problem `{name}` (known: {known})")]
    UnknownProblem { name: String, known: String },

    /// Malformed input data; positions are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A dataset file contained no records.
    #[error("dataset `{0}` contains no records")]
    EmptyDataset(PathBuf),

    #[error("io error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
