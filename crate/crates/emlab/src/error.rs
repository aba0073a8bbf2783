//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by coefficient validation, transform construction,
/// simulation and statistics.
#[derive(Debug, Error)]
pub enum EmlabError {
    /// A constructor was handed a parameter outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A gallery lookup failed; the message lists the known problems.
    #[error("unknown gallery problem `{name}`; known problems: {known}")]
    UnknownProblem { name: String, known: String },

    /// The transform needs an integrable drift.
    #[error(
        "drift is not integrable; apply `truncate_drift` first to obtain a \
         compactly supported drift with a finite L1 norm"
    )]
    DriftNotIntegrable,

    /// A query left the tabulated range of a transform.
    #[error("argument {value} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    /// Step counts are incompatible (coupling requires divisibility).
    #[error("step count {coarse} does not divide {fine}")]
    Divisibility { coarse: u64, fine: u64 },

    /// Two paths cannot be compared because neither grid refines the other.
    #[error("paths with {a} and {b} steps live on incompatible grids")]
    IncompatibleGrids { a: u64, b: u64 },

    /// A rate fit was requested on unusable data.
    #[error("rate fit failed: {0}")]
    FitFailed(String),

    /// No convergence statement covers the requested parameter combination.
    #[error("no theoretical rate available: {0}")]
    NoTheoreticalRate(String),

    /// An experiment configuration failed validation.
    #[error("invalid config key `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    /// A built table violated one of its contract bounds.
    #[error("construction postcondition violated: {0}")]
    PostconditionViolated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EmlabError>;
