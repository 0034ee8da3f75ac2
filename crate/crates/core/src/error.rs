use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular matrix: zero pivot at elimination step {pivot}")]
    SingularMatrix { pivot: usize },
    #[error("linear solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("slab {slab} failed: {source}")]
    Slab {
        slab: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("problem has no exact solution to measure errors against")]
    MissingExactSolution,
    #[error("time {t} outside [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
