use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown indeterminate `{0}`")]
    UnknownIndeterminate(String),

    #[error("duplicate indeterminate `{0}`")]
    DuplicateIndeterminate(String),

    #[error("system must be square in its variables: {equations} equations, {variables} variables")]
    NonSquare { equations: usize, variables: usize },

    #[error("line direction must be nonzero")]
    ZeroDirection,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("Newton iteration did not converge within {0} iterations")]
    NewtonDivergence(usize),

    #[error("non-uniform partition: class sizes {0:?}")]
    NonUniformPartition(Vec<usize>),

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("fiber is singular over this parameter: {0}")]
    BranchPoint(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("seed point fails residual check: |F| = {0:.3e}")]
    SeedResidual(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed problem file: {0}")]
    MalformedFile(String),
}
