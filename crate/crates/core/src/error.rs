use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested configuration has no feasible solution (e.g. `delta > F(A)`).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The model violates one of its structural invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The likelihood ratio diverges at a point where the importance function is positive.
    #[error("infinite weight at x = {x}: target is not absolutely continuous with respect to the proposal on the importance set")]
    InfiniteWeight { x: f64 },

    /// A rate of zero carries no exponential guarantee.
    #[error("no large-deviations guarantee: rate is zero")]
    ZeroRate,

    /// Root finding failed to bracket or converge.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// The exponential moment `∫ exp(λ w f) dF̃` is infinite or overflows.
    #[error("moment generating function diverges ({0}); the model must satisfy ∫ exp(a·w·f) dF̃ < ∞ for every a > 0")]
    Divergence(String),

    /// The supplied log moment generating function is not convex on the probe grid.
    #[error("log-MGF is not convex: {0}")]
    NonConvex(String),

    /// A user-supplied functional or intermediate value produced NaN.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exact enumeration would exceed the configured state budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Infeasible(_)
                | Error::InvalidModel(_)
                | Error::InfiniteWeight { .. }
        )
    }
}
