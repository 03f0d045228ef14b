//! Crate-wide error type.

use thiserror::Error;

/// Why an exponent triple was rejected by validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleRejection {
    /// An exponent is ≤ 1, infinite, or NaN.
    OutOfRange,
    /// The reciprocals do not sum to 2.
    ScalingIdentity,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent triple rejected: {0}")]
    RejectedTriple(&'static str, TripleRejection),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite sample encountered: {0}")]
    NonFinite(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("function norm {norm} is not 1 within tolerance {tol}")]
    NotUnitNorm { norm: f64, tol: f64 },

    #[error("thresholds must be strictly increasing and positive")]
    UnsortedThresholds,

    #[error("level set is empty")]
    EmptySet,

    #[error("negative sample in a nonnegative operation")]
    NegativeInput,

    #[error("input too large for brute-force oracle: {cells} cells exceeds {limit}")]
    TooLarge { cells: usize, limit: usize },

    #[error("optimization failed to converge: {0}")]
    OptimizationFailure(String),

    #[error("insufficient rich points: fraction {rich_fraction} below quorum {quorum}")]
    InsufficientRichPoints { rich_fraction: f64, quorum: f64 },

    #[error("coefficient magnitude below 1e-9")]
    DegenerateCoefficients,

    #[error("samples contain exact zeros; character recovery undefined")]
    ZeroSamples,

    #[error("weighted second moment at or below cell resolution")]
    DegenerateSecondMoment,

    #[error("grid too coarse for requested scale: scale*cell^2 = {scale_cell_sq}")]
    GridTooCoarse { scale_cell_sq: f64 },

    #[error("phase undefined on {excluded_fraction} of the sample ball")]
    PhaseUndefined { excluded_fraction: f64 },

    #[error("empty search box for grid search")]
    EmptySearchBox,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
