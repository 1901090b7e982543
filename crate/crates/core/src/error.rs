use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("offset {offset} out of range for dimension {n}")]
    OffsetOutOfRange { offset: i64, n: usize },
    #[error("zero entry on the main diagonal at row {0}")]
    ZeroDiagonal(usize),
    #[error("matrix is entirely zero")]
    ZeroMatrix,
    #[error("matrix is numerically singular: {0}")]
    Singular(String),
    #[error("reduced system for row {row} is singular (rcond estimate {rcond:e})")]
    SingularReducedSystem { row: usize, rcond: f64 },
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("circuit needs {needed} qubits, guard is {guard}")]
    QubitGuard { needed: usize, guard: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("zero eigenvalue in circulant spectrum at k = {0}")]
    ZeroEigenvalue(usize),
    #[error("unsupported stencil: {0}")]
    UnsupportedStencil(String),
    #[error("matrix market parse error at line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
