use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input violates a structural contract (e.g. columns not unit norm).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is rank deficient: numerical rank {rank} of {cols} columns")]
    Singular { rank: usize, cols: usize },

    #[error("coordinate descent did not converge after {sweeps} sweeps (KKT gap {kkt_gap:e})")]
    Convergence { sweeps: usize, kkt_gap: f64 },

    #[error("degenerate knot at step {step}: lambda_k equals lambda_k+1")]
    DegenerateKnot { step: usize },

    /// Monte Carlo estimation could not produce an estimate.
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
