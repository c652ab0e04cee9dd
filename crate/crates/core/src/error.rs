use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("oracle check failed: {0}")]
    Oracle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be finite and positive, got {v}"))
    }
}
