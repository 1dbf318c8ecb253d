use thiserror::Error;

/// Errors raised by state construction, linear algebra and channel application.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {k} out of range for {n} modes")]
    ModeOutOfRange { k: usize, n: usize },

    #[error("dimension mismatch: {0} vs {1} modes")]
    DimensionMismatch(usize, usize),

    #[error("invalid fermion number: N = {big_n}, n = {n}")]
    InvalidParticleNumber { big_n: usize, n: usize },

    #[error("operation requires a state of definite fermion number")]
    IndefiniteParticleNumber,

    #[error("operation requires exactly {expected} fermions, state has {found}")]
    WrongParticleNumber { expected: usize, found: usize },

    #[error("state is not normalized (norm deviation {0:e})")]
    NotNormalized(f64),

    #[error("mode count {0} exceeds the supported maximum")]
    TooManyModes(usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("spectrum is not sorted in descending order")]
    Unsorted,

    #[error("value {0} outside [0, 1]")]
    OutOfUnitInterval(f64),

    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid measurement parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid entropy function `{0}`: {1}")]
    InvalidEntropy(String, String),

    #[error("number parity is not definite on the given modes")]
    IndefiniteParity,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("insufficient ancilla modes: need {needed} basis states, have {available}")]
    InsufficientAncilla { needed: usize, available: usize },

    #[error("{n} modes is not a multiple of N = {big_n}")]
    NotMultiple { n: usize, big_n: usize },

    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
