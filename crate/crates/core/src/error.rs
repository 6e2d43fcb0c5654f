use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    BadLength {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range ({range})")]
    IndexOutOfRange { index: usize, range: String },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("basis columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("spectral gap assumption fails at n = {n}: sigma = {sigma:?}")]
    GapViolation { n: usize, sigma: Vec<f64> },

    #[error("matrix is rank deficient (rank {rank} < {m})")]
    RankDeficient { rank: usize, m: usize },

    #[error("vector must have unit norm, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("direction is not admissible: {0}")]
    Inadmissible(String),

    #[error("scaling range unbounded below: denominator {denominator:e} is not positive")]
    UnboundedScaling { denominator: f64 },

    #[error("matrix must be {expected}x{expected}, got {m}x{m}")]
    WrongSize { expected: usize, m: usize },

    #[error("enumeration guard exceeded: m = {m} > {limit}")]
    GuardExceeded { m: usize, limit: usize },

    #[error("matrix is not strictly totally positive")]
    NotStp,

    #[error("vector has zero components at {indices:?}")]
    ZeroComponents { indices: Vec<usize> },

    #[error("all-zero vector has no sign pattern")]
    ZeroVector,

    #[error("expected {expected} sign changes, found {found}")]
    SignChangeCount { expected: usize, found: usize },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("singular value decomposition did not converge")]
    NoConvergence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
