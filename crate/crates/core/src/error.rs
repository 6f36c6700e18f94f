use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin magnitude {0}: expected a positive half-integer")]
    InvalidSpin(f64),

    #[error("site index {index} out of range for a lattice of {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("vector length {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("operator is not hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("not a density operator: {0}")]
    InvalidDensityOperator(String),

    #[error("superoperator is not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),

    #[error("superoperator dimension {dim} exceeds the configured maximum {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("eigensolver did not converge (n = {dim}, |L|_F = {norm:.3e}, max |entry| = {max_entry:.3e})")]
    EigenNoConvergence { dim: usize, norm: f64, max_entry: f64 },

    #[error("singular value decomposition did not converge (n = {0})")]
    SvdNoConvergence(usize),

    #[error("defective eigenvalue cluster at {eigenvalue}: {detail}")]
    DefectiveCluster { eigenvalue: String, detail: String },

    #[error("effective generator on the zero-eigenvalue subspace has a {0}-dimensional null space")]
    DegenerateEffectiveGenerator(usize),

    #[error("Kossakowski matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("matrix exponential overflowed (|A|_1 = {0:.3e})")]
    ExponentialOverflow(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("incompatible records: {0}")]
    IncompatibleRecords(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
