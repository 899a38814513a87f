use thiserror::Error;

/// Errors raised by the divergence and entropy routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grading sample needs at least 2 grades, got {0}")]
    TooShort(usize),

    #[error("grades must be strictly increasing: grade[{index}] = {value} does not exceed grade[{}] = {previous}", index - 1)]
    NotStrictlyIncreasing {
        index: usize,
        value: f64,
        previous: f64,
    },

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("labels length {labels} does not match grades length {grades}")]
    LabelMismatch { grades: usize, labels: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("negative value {value} at position {index}")]
    Negative { index: usize, value: f64 },

    #[error("weights do not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("empty weight vector")]
    Empty,

    #[error("rate undefined: delta_f = 0")]
    ZeroReference,

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("exhaustive search over {n}! chains exceeds the limit n <= {limit}")]
    ExhaustiveLimit { n: usize, limit: usize },

    #[error("support mismatch: [{0}, {1}] vs [{2}, {3}]")]
    SupportMismatch(f64, f64, f64, f64),

    #[error("invalid grading parameters: {0}")]
    InvalidParams(String),

    #[error("value {u} lies outside the image [{lo}, {hi}]")]
    OutsideImage { u: f64, lo: f64, hi: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error} over {cells} cells")]
    NonConvergence {
        estimate: f64,
        error: f64,
        cells: usize,
    },

    #[error("integrand is not a number at x = {0}")]
    NotANumber(f64),

    #[error("not a probability grading: cdf runs from {lo} to {hi}")]
    NotProbability { lo: f64, hi: f64 },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::RootFinding(_) | Error::NonConvergence { .. } | Error::NotANumber(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
