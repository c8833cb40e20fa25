use thiserror::Error;

/// Errors shared by all modules.
///
/// The CLI maps these onto exit codes: verification failures are code 2,
/// resource guards are code 3, and malformed input is code 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector is not a lattice point")]
    NotLatticePoint,
    #[error("zero vector not allowed here")]
    ZeroVector,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("basis vectors are linearly dependent")]
    SingularBasis,
    #[error("dimension {0} exceeds the supported cap of {1}")]
    DimensionTooLarge(usize, usize),
    #[error("matrix is not symmetric positive-definite")]
    NotPositiveDefinite,
    #[error("no exact rational square-root factorization exists for this form")]
    NotRationalCholesky,
    #[error("last successive minimum exceeds 1; the covering hypotheses fail")]
    MinimaTooLarge,
    #[error("operation requires a ball body")]
    BodyNotBall,
    #[error("point enumeration exceeds the guard ({0} points)")]
    TooManyPoints(usize),
    #[error("flat enumeration exceeds the guard")]
    TooManyFlats,
    #[error("grid box too small; caller must raise the box constant")]
    BoxTooSmall,
    #[error("covering recursion exceeded depth {0}")]
    RecursionGuard(usize),
    #[error("no prime in the admissible range; the statement is trivial")]
    NoValidPrime,
    #[error("lift search failed; exhaustive fallback found no admissible point")]
    LiftNotFound,
    #[error("random construction failed verification after {0} attempts")]
    RetriesExhausted(u32),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("scale too small: {0}")]
    ScaleTooSmall(String),
    #[error("instance too large for exact counting")]
    TooLarge,
    #[error("series is degenerate; need >= 3 strictly increasing positive points")]
    DegenerateSeries,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code class used by the CLI: 2 verification, 3 guards, 4 usage.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            VerificationFailed(_) | RetriesExhausted(_) | LiftNotFound => 2,
            TooManyPoints(_) | TooManyFlats | TooLarge | RecursionGuard(_)
            | DimensionTooLarge(..) | BoxTooSmall => 3,
            _ => 4,
        }
    }
}
