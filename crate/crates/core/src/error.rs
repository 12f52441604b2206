use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice for n={n}, d={d} exceeds the dimension cap of {cap} diagrams")]
    Capacity { n: usize, d: usize, cap: usize },

    #[error("matrix has dimension zero")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dense solver cap exceeded: dimension {dim} > {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("test vector vanishes on the lattice for n={n}, d={d}; it needs n >= d(d+1)/2")]
    ZeroTestVector { n: usize, d: usize },

    #[error(
        "unsupported dimension d={d}: regular simplices tile the hyperplane only for d = 2, 3"
    )]
    UnsupportedDimension { d: usize },

    #[error("simplex {index} has zero volume")]
    DegenerateSimplex { index: usize },

    #[error("recursion cap exceeded: d={d} > {cap}")]
    RecursionCap { d: usize, cap: usize },

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
