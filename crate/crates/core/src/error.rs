use thiserror::Error;

use crate::numeric::ode::OdeError;
use crate::numeric::quadrature::QuadratureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("quadrature rule: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("degenerate steady-state system: {0}")]
    Degenerate(String),
    #[error("not converged: {0}")]
    Convergence(String),
    #[error("differentiation failed: {0}")]
    Differentiation(String),
    #[error("grid under-resolved: {0}")]
    Resolution(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for errors caused by the user's input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Config(_)
                | Error::Precondition(_)
                | Error::Parse { .. }
                | Error::Singular(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
