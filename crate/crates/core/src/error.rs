use thiserror::Error;

/// Failures reported by the geometry routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolError {
    /// A coordinate exponential `e^{|z|}` would leave the representable range.
    #[error("z-coordinate {z} exceeds the representable range (|z| > {limit})")]
    Overflow { z: f64, limit: f64 },

    /// An argument lies outside the domain of the operation.
    #[error("{what}: {value} is outside the valid domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// An iterative solver ran out of budget.
    #[error("{what} did not converge (best residual {residual:e})")]
    NonConvergence { what: &'static str, residual: f64 },

    /// An integration would need more steps than the configured maximum.
    #[error("integration needs {needed} steps, limit is {limit}")]
    StepLimit { needed: usize, limit: usize },

    /// Mesh construction could not honour the requested parameters.
    #[error("mesh: {0}")]
    Mesh(String),
}

impl SolError {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        SolError::Domain {
            what,
            value,
            expected,
        }
    }
}

pub type Result<T> = std::result::Result<T, SolError>;
