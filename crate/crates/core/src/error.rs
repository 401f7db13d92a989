use std::fmt;

use thiserror::Error;

/// A single violated input invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {}", join(.0))]
    Validation(Vec<FieldError>),

    /// The closed form divides by `v^2 + 2*mu = 2*(r - y - gamma)`.
    #[error("closed form is singular: |r - y - gamma| = {gap:e} <= {tol:e}")]
    SingularParameterization { gap: f64, tol: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error_estimate:e})")]
    NonConvergence {
        subdivisions: usize,
        error_estimate: f64,
    },

    #[error("simulation needs {required} normal draws, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("{0}")]
    Domain(String),
}

impl Error {
    /// Input problems as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Domain(_))
    }
}

fn join(errs: &[FieldError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
