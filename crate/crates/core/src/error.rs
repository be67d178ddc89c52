use thiserror::Error;

/// Errors raised by the pricing core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the region where a transform or MGF exists.
    #[error("domain error: {0}")]
    Domain(String),

    /// No admissible parameter exists (empty strip intersection, missing moment).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Malformed or inconsistent parameters.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A precondition of a valuation formula could not be verified.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Quadrature could not reach the requested accuracy within its node budget.
    #[error("accuracy not reached: estimate {estimate:e}, error {error:e} after {nodes} nodes")]
    Accuracy {
        estimate: f64,
        error: f64,
        nodes: usize,
    },

    /// Any other numerical breakdown (branch failure, negative price, overflow).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
