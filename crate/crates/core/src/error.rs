use thiserror::Error;

/// Errors raised by the numerical kernels and check routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("matrix is not Hermitian: relative deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("strict positivity violated: min eigenvalue {min_eigenvalue:.6e} below epsilon {epsilon:.6e}")]
    StrictPositivityViolated { min_eigenvalue: f64, epsilon: f64 },
    #[error("basis columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("domain dimension must satisfy 1 <= d < n, got d={d}, n={n}")]
    InvalidDomainDimension { d: usize, n: usize },
    #[error("extension must add at least one complement direction")]
    EmptyExtension,
    #[error("complement intersects the domain (rank loss at column {column})")]
    DegenerateComplement { column: usize },
    #[error("non-integrable singularity: combined exponent {exponent} at x={endpoint}")]
    NonIntegrableSingularity { exponent: f64, endpoint: f64 },
    #[error("quadrature tolerance not met: achieved {achieved:.3e}, target {target:.3e}")]
    ToleranceNotMet { achieved: f64, target: f64 },
    #[error("truncation too small: {detail}")]
    TruncationTooSmall { detail: String },
    #[error("domain violation: {what}")]
    DomainViolation { what: String },
    #[error("complement function is not in the W* domain (leading exponent {leading_exponent})")]
    NotInWStarDomain { leading_exponent: f64 },
    #[error("extension fails the dissipativity condition (margin {margin:.6e})")]
    ConditionFailed { margin: f64 },
    #[error("defect nullity unstable across refinements: {coarse} vs {fine}")]
    UnstableNullity { coarse: usize, fine: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
