use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain has no primitives")]
    EmptyDomain,
    #[error("degenerate primitive: {0}")]
    DegeneratePrimitive(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid has no inside nodes")]
    NoInsideNodes,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("empty zero set")]
    EmptyZeroSet,
    #[error("solver did not converge after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },
    #[error("no existence: lambda {lambda} does not exceed 1/inradius {critical}")]
    BelowCritical { lambda: f64, critical: f64 },
    #[error("empty free boundary")]
    EmptyFreeBoundary,
    #[error("unknown scenario: {0}")]
    UnknownScenario(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("field format: {0}")]
    Format(String),
    #[error("spec parse: {0}")]
    Spec(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
