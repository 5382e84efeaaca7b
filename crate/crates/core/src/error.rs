use thiserror::Error;

/// Errors raised by the homogenization toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid elastic model: {0}")]
    InvalidModel(String),
    #[error("stretch system is numerically singular")]
    SingularSystem,
    #[error("invalid shape function: {0}")]
    InvalidShape(String),
    #[error("grid size {n} aliases a band limit of {band}; need at least {required}")]
    Aliasing { n: usize, band: usize, required: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cell solve did not converge{}: residual {residual:e} after {iterations} iterations", load.as_ref().map(|l| format!(" for basis load {l}")).unwrap_or_default())]
    NonConvergence {
        residual: f64,
        iterations: usize,
        load: Option<String>,
    },
    #[error("descent exceeded {iterations} iterations with gradient norm {gradient_norm:e}")]
    IterationCap { iterations: usize, gradient_norm: f64 },
    #[error("invalid load: {0}")]
    InvalidLoad(String),
}
