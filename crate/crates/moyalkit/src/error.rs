use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Error, Debug)]
pub enum MoyalError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NonSymmetric(f64),
    #[error("matrix is not positive definite (eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is not symplectic (residual {0:.3e})")]
    NotSymplectic(f64),
    #[error("shift {shift:.3} exceeds the permitted range {limit:.3}")]
    ShiftOutOfRange { shift: f64, limit: f64 },
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("non-finite value produced in {0}")]
    NonFinite(String),
    #[error("series diverges: partial-sum terms grew for {0} consecutive orders; reduce t")]
    DivergentSeries(usize),
    #[error("time step {dt:.3e} violates the stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("norm drift {drift:.3e} exceeded the abort threshold {threshold:.3e}")]
    NormDriftExceeded { drift: f64, threshold: f64 },
    #[error("frequency tail estimate {tail:.3e} exceeds 10% of the value {value:.3e}; grid too small")]
    TailTooLarge { tail: f64, value: f64 },
    #[error("unsupported degrees of freedom n={0}; this operation is implemented for n=1")]
    UnsupportedDof(usize),
    #[error("field file error: {0}")]
    FieldFile(String),
    #[error("hbar mismatch: file carries {file:.6}, scenario expects {scenario:.6}")]
    HbarMismatch { file: f64, scenario: f64 },
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MoyalError>;
