//! Error type shared by every module.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building trees, stopping times or envelopes.
#[derive(Debug, Error)]
pub enum Error {
    /// A size-dependent computation would exceed its configured budget.
    #[error("cap exceeded: {what} needs {needed}, cap is {cap}; lower the horizon steps or the control count, or raise the cap")]
    CapExceeded { what: String, needed: u128, cap: u128 },

    /// A control violates the drift or volatility bound, or the control set is malformed.
    #[error("bad control set: {0}")]
    BadControl(String),

    /// A window length or modulus argument was not strictly positive.
    #[error("bad window length {0}: must be > 0")]
    BadDelta(f64),

    /// Window-time parameters are inconsistent.
    #[error("bad window: {0}")]
    BadWindow(String),

    /// The ordering premise of the sandwich construction fails on a concrete pair of paths.
    #[error("sandwich premise fails for order {order}: path {base} and path {other} are within {delta} up to {time}, yet the earlier time {lhs} exceeds the later time {rhs}")]
    HypothesisFailed {
        order: usize,
        base: usize,
        other: usize,
        delta: f64,
        time: f64,
        lhs: f64,
        rhs: f64,
    },

    /// The extracted policy and stopping rule do not reproduce the envelope value.
    #[error("optimality gap {gap:e}: envelope root {envelope} versus policy value {policy}")]
    OptimalityGap { envelope: f64, policy: f64, gap: f64 },

    /// A payoff, index or modulus specification is invalid.
    #[error("bad specification: {0}")]
    BadSpec(String),

    /// The experiment configuration does not validate.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
