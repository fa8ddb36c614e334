//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used by all fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error at line {line}, column {column}: {message}")]
    Csv {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    /// One entry per violated parameter invariant, with the offending values.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("measure `{measure}` requires univariate input, got {dim} columns")]
    DimensionMismatch { measure: String, dim: usize },

    #[error("unknown regularity measure `{0}` (expected one of: ks, t, hotelling)")]
    UnknownMeasure(String),

    #[error("window covariance matrix is singular; rerun with a positive ridge")]
    SingularCovariance,

    #[error("no time point admits valid two-sample windows for measure `{measure}` (T={t_len}, delta={delta})")]
    NoValidWindows {
        measure: String,
        t_len: usize,
        delta: usize,
    },

    #[error("zero denominator in roughness sums at s={s}")]
    ZeroDenominator { s: usize },

    #[error("invalid report: {0}")]
    InvalidReport(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
