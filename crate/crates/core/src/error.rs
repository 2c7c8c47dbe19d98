use thiserror::Error;

use crate::solver::GridState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wave speed breaches declared bounds: {0}")]
    BoundsViolation(String),

    #[error("c'(u0) = {c_prime} is not positive; blow-up data requires an increasing speed at u0")]
    SpeedNotIncreasing { c_prime: f64 },

    #[error("invalid speed model: {0}")]
    InvalidSpeed(String),

    #[error("invalid problem setup: {0}")]
    InvalidSetup(String),

    #[error("grid does not match setup domain: {0}")]
    DomainMismatch(String),

    #[error("invalid scheme configuration: {0}")]
    InvalidScheme(String),

    #[error("non-finite value at t = {}, last finite state kept", last_finite.t)]
    NonFiniteState { last_finite: Box<GridState> },

    #[error("characteristic left the domain at t = {t}, r = {r}")]
    PathLeftDomain { t: f64, r: f64 },

    #[error("characteristics do not intersect before t = {t_end}")]
    NoIntersection { t_end: f64 },

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("run ended before the requested time: {0}")]
    RunIncomplete(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Validation failures map to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::BoundsViolation(_)
                | Error::SpeedNotIncreasing { .. }
                | Error::InvalidSpeed(_)
                | Error::InvalidSetup(_)
                | Error::DomainMismatch(_)
                | Error::InvalidScheme(_)
                | Error::HypothesisViolated(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}
