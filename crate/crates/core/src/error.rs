use thiserror::Error;

/// Errors raised by the numerical and categorical layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("linear system has no solution (residual {residual:e})")]
    NoSolution { residual: f64 },

    #[error("matrix is not idempotent (residual {residual:e})")]
    NotIdempotent { residual: f64 },

    #[error("matrix is not diagonalizable at the clustering tolerance (residual {residual:e})")]
    Defective { residual: f64 },

    #[error("matrix is numerically singular (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error("solver failed: best residual {residual:e} after {restarts} restarts")]
    SolverFailed {
        residual: f64,
        restarts: usize,
        iterations: usize,
    },

    #[error("objects belong to different backends")]
    BackendMismatch,

    #[error("morphism violates the intertwiner law (residual {residual:e})")]
    NotIntertwiner { residual: f64 },

    #[error("object mismatch in {0}")]
    ObjectMismatch(String),

    #[error("morphism is not an endomorphism of the tensor unit")]
    NotUnitObject,

    #[error("operation requires a nonzero object")]
    ZeroObject,

    #[error("duality solutions are not related by a unitary (residual {residual:e})")]
    NotEquivalent { residual: f64 },

    #[error("algebra is not separable (residual {residual:e})")]
    NotSeparable { residual: f64 },

    #[error("algebra is not connected (dim Hom(1, A) = {dim})")]
    NotConnected { dim: usize },

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("tolerance values invalid: {0}")]
    InvalidTolerance(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
