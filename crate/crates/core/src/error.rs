use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency axis: {0}")]
    InvalidAxis(String),

    #[error("spectra list is empty")]
    EmptySpectra,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("multi-index {index:?} out of bounds for lattice with M = {bounds:?}")]
    IndexOutOfBounds { index: Vec<i64>, bounds: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("weighting is identically zero (norm {0:e})")]
    ZeroWeighting(f64),

    #[error("bond dimension must be at least 1, got {0}")]
    InvalidBondDim(usize),

    #[error("lattice has {size} points, exceeding the enumeration cap of {cap}")]
    EnumerationCap { size: u128, cap: u128 },

    #[error("imaginary residue {0:e} exceeds tolerance; weighting is not symmetric")]
    ImaginaryResidue(f64),

    #[error("factorization failed after jitter up to {0:e}")]
    Factorization(f64),

    #[error("least-squares design is rank deficient (pivot ratio {0:e}); frequencies alias at this sample budget")]
    RankDeficient(f64),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("observable is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("requested {requested} feature entries, exceeding the memory cap of {cap}")]
    MemoryCap { requested: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
