use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument lies on a singularity: {0}")]
    Singular(String),

    #[error("no pole converged in the search rectangle ({failed} seeds failed)")]
    NoPoles { failed: usize },

    #[error("revival order {given} too small for t_max (need at least {needed})")]
    RevivalOrder { given: usize, needed: usize },

    #[error("fit window has {points} usable points, need {needed}")]
    WindowUnderrun { points: usize, needed: usize },

    #[error("fit residual {residual:.3e} exceeds tolerance {tol:.3e} (rate {rate:.6e})")]
    FitResidual { rate: f64, residual: f64, tol: f64 },

    #[error("root bracket failed for mode {0}")]
    Bracket(usize),

    #[error("capacitance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigen solver produced a non-positive frequency squared {0:.3e}")]
    Unstable(f64),

    #[error("epsilon extrapolation did not converge: relative change {0:.3e}")]
    Extrapolation(f64),

    #[error("gamma derivative of order {order} requested, table holds {max}")]
    DerivativeTable { order: usize, max: usize },

    #[error("tuple count {count} exceeds budget {budget}")]
    TupleBudget { count: u128, budget: u128 },

    #[error("spectral content at grid edge: ratio {0:.3e}")]
    Aliasing(f64),

    #[error("modes not sorted ascending at index {0}")]
    Ordering(usize),

    #[error("{failed} of {total} realizations failed")]
    Realizations { failed: usize, total: usize },

    #[error("config error at `{key}`{}: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { key: String, line: Option<usize>, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures caused by the input rather than the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Config { .. })
    }
}
