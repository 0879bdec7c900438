use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// The pencil or model lacks a structural property (regularity, a
    /// non-empty null space, ...).
    #[error("structural failure: {0}")]
    Structural(String),

    #[error("rank decision is ambiguous at threshold {threshold:e}; borderline singular values {values:?}")]
    RankAmbiguity { threshold: f64, values: Vec<f64> },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("closed-loop predictor matrix has spectral radius {0} >= 1; (A, C) is not detectable")]
    Detectability(f64),

    #[error("ill-conditioned normal equations: {0}")]
    Conditioning(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Dimension(msg()))
    }
}
