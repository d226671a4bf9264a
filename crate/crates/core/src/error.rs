use alloc::string::String;

/// Errors produced by the dephasing toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("undefined value: {0}")]
    Undefined(&'static str),
    #[error("{n} qubits exceeds the cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("no negative rate in the Lindblad decomposition")]
    NoNegativeRate,
    #[error("linear system is rank deficient: rank {rank} of {unknowns} unknowns")]
    RankDeficient { rank: usize, unknowns: usize },
    #[error("coherence trace has no usable samples")]
    DegenerateTrace,
    #[error("model requirement violated: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
