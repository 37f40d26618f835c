//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset handling, index computation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}, column {column}: value {value} is not strictly positive")]
    NonpositiveValue { line: usize, column: usize, value: f64 },

    #[error("line {line}: expected {expected} columns, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("need at least {needed} observations, found {found}")]
    InsufficientSample { needed: usize, found: usize },

    #[error("coordinate {coord} has zero variance; correlation undefined")]
    DegenerateMarginal { coord: usize },

    #[error("magnitude overflow, rescale data")]
    MagnitudeOverflow,

    #[error("invalid moment summary: {0}")]
    InvalidMoments(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "mean vectors differ (max relative difference {max_rel:.3e} exceeds {tol:.3e}); \
         relative index undefined"
    )]
    MeanMismatch { max_rel: f64, tol: f64 },

    #[error("reference index is zero; ratio undefined")]
    ZeroReferenceIndex,

    #[error("mean vector outside the variance-function domain")]
    OutsideMeanDomain,

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("probability {0} outside the open interval (0, 1)")]
    QuantileDomain(f64),

    #[error("confidence level {0} outside the open interval (0, 1)")]
    InvalidLevel(f64),

    #[error("test statistic undefined: estimated asymptotic variance is zero")]
    DegenerateTest,

    #[error(
        "bootstrap failed: {degenerate} of {total} resamples had a zero covariance matrix"
    )]
    DegenerateBootstrap { degenerate: usize, total: usize },

    #[error("degenerate beta margin {margin}: shape parameters a={a}, b={b} must be positive")]
    DegenerateBetaMargin { margin: usize, a: f64, b: f64 },

    #[error(
        "variation matrix invalid for pair ({i}, {j}): off-diagonal mass leaves no \
         admissible correlation range"
    )]
    InvalidVariationMatrix { i: usize, j: usize },

    #[error(
        "target correlation {requested} for pair ({i}, {j}) infeasible: attainable \
         range is about [{low:.4}, {high:.4}]"
    )]
    InfeasibleCorrelation {
        i: usize,
        j: usize,
        requested: f64,
        low: f64,
        high: f64,
    },

    #[error("matched Gaussian correlation matrix could not be repaired to positive definite")]
    IrreparableCorrelation,

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
