use thiserror::Error;

/// Errors raised by the kaon dynamics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KaonError {
    #[error("unsupported matrix dimension {0} (allowed: 2, 3, 4, 8, 16)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("cannot evolve backwards: target time {target} precedes current time {current}")]
    TimeReversal { target: f64, current: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not defined in the {0} basis")]
    UnsupportedBasis(&'static str),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("trace {0:e} is too small to normalize")]
    VanishingTrace(f64),

    #[error("spin-flip spectrum has imaginary part {0:e}")]
    ComplexSpectrum(f64),

    #[error("decoherence rate is not identifiable from the data: {0}")]
    Unidentifiable(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, KaonError>;

impl From<std::io::Error> for KaonError {
    fn from(e: std::io::Error) -> Self {
        KaonError::Io(e.to_string())
    }
}
