use thiserror::Error;

/// Errors raised across the crate.
///
/// The CLI maps [`Error::Usage`] and [`Error::Config`] to exit code 1 and
/// everything else to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is not symplectic: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotSymplectic { defect: f64, tol: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("ill-conditioned quadratic form: {0}")]
    Conditioning(String),

    #[error("unsupported weight: {0}")]
    Capability(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate window: <g, g> = {0:.3e}")]
    DegenerateWindow(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
