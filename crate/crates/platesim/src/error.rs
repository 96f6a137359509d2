//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("array length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid nonlinearity: {0}")]
    Nonlinearity(String),

    #[error("invalid damping profile: {0}")]
    Damping(String),

    #[error("invalid options: {0}")]
    Options(String),

    #[error("state blew up at t = {t:.6e} (norm {norm:.3e})")]
    BlowUp { t: f64, norm: f64 },

    #[error("grid values of u exceed overflow guard (max |u| = {0:.3e})")]
    Overflow(f64),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("observability precondition failed: {0}")]
    NotObservable(String),

    #[error("requested state outside the controllability radius: {0}")]
    OutOfRadius(String),

    #[error("steering plan failed at leg {leg}: {reason}")]
    PlanFailed { leg: usize, reason: String },

    #[error("configuration error")]
    Config(Vec<crate::config::ConfigError>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
