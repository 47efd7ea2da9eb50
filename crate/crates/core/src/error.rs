use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("density operator has trace {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not an isometry (max deviation {deviation:.3e})")]
    NotIsometry { deviation: f64 },
    #[error("matrix is not a projector (max deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },
    #[error("Kraus operators are not trace preserving (max deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid rank vector: {0}")]
    InvalidRanks(String),
    #[error("message map is not injective for this key: messages {first} and {second} both map to {image}")]
    NotInjective {
        first: usize,
        second: usize,
        image: usize,
    },
    #[error("states do not have orthogonal supports (max |rho sigma| entry {overlap:.3e})")]
    NotOrthogonalPair { overlap: f64 },
    #[error("top eigenvalue is degenerate (gap {gap:.3e})")]
    DegenerateTop { gap: f64 },
    #[error("direct trace {direct} and closed form {closed_form} disagree")]
    ClosedFormMismatch { direct: f64, closed_form: f64 },
    #[error("x must be nonnegative, got {0}")]
    NegativeX(f64),
    #[error("average ciphertext depends on the key (max deviation {deviation:.3e})")]
    NotKeyIndependent { deviation: f64 },
    #[error("no {kind} registered under the name {name:?}")]
    UnknownStrategy { kind: &'static str, name: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
