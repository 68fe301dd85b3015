//! Shared error type for all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot parse `{token}` as a signed generator index")]
    BadToken { token: String },

    #[error("generator index {index} out of range 1..={rank}")]
    IndexOutOfRange { index: i64, rank: usize },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("rank must be at least 1")]
    ZeroRank,

    #[error("entries must be finite and positive")]
    NotPositive,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("target lies outside the range of S: {reason}")]
    OutsideRange { reason: String },

    #[error("no preimage found with residual <= {tol:.3e} (best candidate residual {best:.3e})")]
    NoConvergence { tol: f64, best: f64 },

    #[error("closed form applies to dimension 2 only, got {got}")]
    NotDimensionTwo { got: usize },

    #[error("grid search supports dimension <= 3, got {got}")]
    GridDimension { got: usize },

    #[error("coefficient vector must be nonzero")]
    ZeroCoefficients,

    #[error("lambda = {lambda} is outside the open interval ({lo}, {hi}) of admissible eigenvalues")]
    NotInterior { lambda: f64, lo: f64, hi: f64 },

    #[error("matrix is not symmetric: max |m_ij - m_ji| = {asymmetry:.3e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix diagonal must be 1: max |m_ii - 1| = {deviation:.3e}")]
    NotUnitDiagonal { deviation: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("quadratic form value {value:.3e} must be positive")]
    NonPositiveForm { value: f64 },

    #[error("Gram matrix would have {size} rows, exceeding the cap of {cap}")]
    GramTooLarge { size: usize, cap: usize },

    #[error("prefix of length {got} is too short: evaluation reads {needed} symbols")]
    PrefixTooShort { needed: usize, got: usize },

    #[error("word length {len} exceeds the cap of {cap}")]
    LengthCap { len: usize, cap: usize },

    #[error("convolution support would exceed the cap of {cap} terms")]
    SupportCap { cap: usize },

    #[error("geometric series diverges: need sum of d_i^2 < d0^2")]
    DivergentSeries,

    #[error("sample count must be at least 2")]
    TooFewSamples,
}
