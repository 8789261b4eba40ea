use std::path::PathBuf;

/// Errors raised anywhere in the library.
///
/// Variants fall into three families that the command-line front end maps to
/// exit codes: invalid input (1), numeric failure (2) and I/O (3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("{field}: {message}")]
    InvalidInput { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("history has {len} steps but the return needs {required}")]
    HistoryTooShort { len: usize, required: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("behavior probability is zero at history {history}, step {step}")]
    ZeroBehaviorProbability { history: usize, step: usize },

    #[error("history {0} carries no recorded behavior probabilities")]
    MissingBehaviorProbabilities(usize),

    #[error("all importance weights are zero")]
    AllWeightsZero,

    #[error("target policy puts mass on histories the behavior policy never generates")]
    UnsupportedTarget,

    #[error("enumeration needs {paths:.3e} paths, above the cap of {cap}")]
    EnumerationCap { paths: f64, cap: u64 },

    #[error("no convergence after {iterations} iterations (last change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("quadrature diverged: {0}")]
    NonIntegrable(String),

    #[error("infinite covering number at radius {0}")]
    InfiniteCovering(f64),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report output: {0}")]
    Report(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EnumerationCap { .. }
            | Error::NonConvergence { .. }
            | Error::NonIntegrable(_)
            | Error::InfiniteCovering(_)
            | Error::AllWeightsZero => 2,
            Error::Io { .. } | Error::Report(_) => 3,
            _ => 1,
        }
    }
}
