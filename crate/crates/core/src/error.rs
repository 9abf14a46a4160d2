use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("degenerate intercept: response has no variation")]
    DegenerateIntercept,
    #[error("no events: every observation is censored")]
    NoEvents,
    #[error("singular design: rank {rank} < {columns} columns")]
    SingularDesign { rank: usize, columns: usize },
    #[error("column {column} has zero variance after centering")]
    ZeroVariance { column: usize },
    #[error("no convergence after {iterations} iterations (last deviance {last_deviance})")]
    NonConvergence { iterations: usize, last_deviance: f64, last_coefficients: Vec<f64> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate fit: R^2 = 1")]
    DegenerateFit,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("quadrature did not settle: successive levels {coarse} and {fine} (log scale)")]
    Integration { coarse: f64, fine: f64 },
    #[error("model space of {models} models exceeds the budget of {cap}; use stochastic search")]
    BudgetExceeded { models: u128, cap: u128 },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("AUC undefined: validation set contains a single class")]
    UndefinedAuc,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("quantile at p = 1 is infinite")]
    InfiniteQuantile,
    #[error("empty input: {0}")]
    Empty(String),
    #[error("{failed} of {total} bootstrap replicates failed")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
