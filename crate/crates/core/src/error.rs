use thiserror::Error;

/// Errors raised by evaluation, bounds and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The query lies outside the parameter regime a bound is valid in.
    #[error("regime error: {0}")]
    Regime(String),

    /// The series tail could not be certified within the term budget.
    #[error("tolerance {tol:e} not certified within {terms} terms")]
    ToleranceNotReached { tol: f64, terms: usize },

    /// A value does not fit the exact or floating-point budget.
    #[error("overflow: {0}")]
    Overflow(String),

    /// An enumeration would visit more outcomes than allowed.
    #[error("enumeration of {size} outcomes exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    /// An iterative solver exhausted its iteration budget.
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl BellError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        BellError::Domain(msg.into())
    }

    /// True for errors caused by invalid arguments rather than numerical limits.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            BellError::Domain(_) | BellError::Regime(_) | BellError::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, BellError>;
