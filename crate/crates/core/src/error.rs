use thiserror::Error;

/// Errors produced by the queue library.
#[derive(Debug, Error)]
pub enum GeoqError {
    /// Parameters that do not describe a stable, well-formed queue.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Stability requires the offered load R = Λ/μ to stay strictly below N.
    #[error("unstable configuration: offered load R = {offered_load} must satisfy R < N = {n_servers}")]
    Unstable { offered_load: f64, n_servers: u32 },

    /// A solver or table configuration that cannot be honoured.
    #[error("configuration error: {0}")]
    Config(String),

    /// The stationary iteration ran out of budget.
    #[error("stationary solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Quadrature could not resolve the diffusion density.
    #[error("density construction failed: {0}")]
    Density(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GeoqError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, GeoqError::NonConvergence { .. } | GeoqError::Density(_))
    }
}

pub type Result<T> = std::result::Result<T, GeoqError>;
