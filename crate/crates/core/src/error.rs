use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: non-positive price {price} for {ticker} on {date}")]
    NonPositivePrice {
        line: usize,
        date: String,
        ticker: String,
        price: f64,
    },

    #[error("duplicate observation for {ticker} on {date}")]
    DuplicateObservation { date: String, ticker: String },

    #[error("price tables share no common dates")]
    EmptyIntersection,

    #[error("ticker {ticker} has {count} prices; at least 2 are required")]
    TooFewPrices { ticker: String, count: usize },

    #[error("row {ticker} has zero variance")]
    ZeroVariance { ticker: String },

    #[error("panel is not standardized")]
    NotStandardized,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lag {tau} is not admissible for T = {t}")]
    LagOutOfRange { tau: i64, t: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration did not converge after {iterations} sweeps (N = {n}, norm {norm:e})")]
    NoConvergence {
        iterations: usize,
        n: usize,
        norm: f64,
    },

    #[error("only {count} eigenvalues left after exclusion; at least {required} are required")]
    TooFewEigenvalues { count: usize, required: usize },

    #[error("fit did not converge: {0}")]
    FitNoConvergence(String),

    #[error("fitted {param} = {value} hit its bound [{lower}, {upper}]")]
    FitAtBound {
        param: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("decomposition keeps {kept} of {n} components; discarded eigenvalue mass {discarded:e}")]
    Truncated {
        kept: usize,
        n: usize,
        discarded: f64,
    },

    #[error("series is not centered (mean {mean:e})")]
    NotCentered { mean: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
