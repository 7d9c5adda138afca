use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock cutoff d = {cutoff} is too small, need d > {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("integration produced non-finite values near t = {t}")]
    NonFinite { t: f64 },

    #[error(
        "step-halving did not converge: relative change {change:.3e} after {halvings} halvings"
    )]
    NotConverged { change: f64, halvings: usize },

    #[error("cutoff escalation hit the cap d = {cap} with tail population {tail:.3e}")]
    CutoffCapReached { cap: usize, tail: f64 },

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
