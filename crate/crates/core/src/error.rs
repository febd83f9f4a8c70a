use thiserror::Error;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series too short: {context} needs at least {required} observations, got {actual}")]
    TooShort {
        context: &'static str,
        required: usize,
        actual: usize,
    },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("lag {lag} out of range for series of length {len}")]
    LagOutOfRange { lag: usize, len: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid parameters: {0}")]
    Domain(String),
    #[error("collinear design: column(s) {} are linearly dependent on earlier columns", columns.join(", "))]
    Collinear { columns: Vec<String> },
    #[error("oversaturated model: {k} parameters need more than {} observations, got {n}", k + 1)]
    Oversaturated { k: usize, n: usize },
    #[error("series could not be made stationary within d <= {max_d}, D <= 1 (final KPSS statistic {statistic:.4})")]
    NonStationarizable { max_d: usize, statistic: f64 },
    #[error("model selection failed: every candidate failed\n{diagnostics}")]
    SelectionFailed { diagnostics: String },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("span error: {0}")]
    Span(String),
    #[error("gap in demand data: no records on {0}")]
    Gap(String),
    #[error("duplicate record for {0}")]
    Duplicate(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
