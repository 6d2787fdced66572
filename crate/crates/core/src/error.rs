use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of the function (e.g. `h(t)` for `t <= 0`).
    #[error("{what}: value {value} outside domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate denominator: phi(omega) = {0}")]
    DegenerateDenominator(f64),

    #[error("degenerate path: min phi(omega(s)) = {min_phi} below {threshold}")]
    DegeneratePath { min_phi: f64, threshold: f64 },

    #[error("condition is not strict: lhs {lhs} vs rhs {rhs}")]
    ConditionNotStrict { lhs: f64, rhs: f64 },

    #[error("h'(t) = {0} is not positive; bound only defined for h' > 0")]
    HprimeNonpositive(f64),

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },

    #[error("field not admissible: det = {det} at node {node}")]
    Inadmissible { node: usize, det: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
