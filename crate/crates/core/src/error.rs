use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} outside of table range (len {len})")]
    Range { index: usize, len: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("sample grid does not cover quadrature node {node} on axis {axis}")]
    Alignment { axis: usize, node: f64 },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("associated function did not settle below p = {cap} at rho = {rho} (best p so far {best})")]
    Cap { rho: f64, cap: usize, best: usize },

    #[error("insufficient headroom: slot {slot} holds magnitude {magnitude:e}")]
    Headroom { slot: usize, magnitude: f64 },

    #[error("insufficient data: {usable} usable coefficients, need {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index}")]
    EigenNonConvergence { index: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
