use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {x} lies outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("invalid fiber: {0}")]
    Fiber(String),

    #[error("invalid value for `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("mode label {label} is not valid for {fiber}: {contract}")]
    ModeLabel {
        label: String,
        fiber: &'static str,
        contract: &'static str,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("incompatible operands: {0}")]
    Mismatch(String),

    #[error("tridiagonal elimination broke down at row {row}")]
    SolverBreakdown { row: usize },

    #[error(
        "reference slice is degenerate at phi node {phi}: no inverse-metric entry exceeds 1e-12"
    )]
    DegenerateReference { phi: usize },

    #[error("potential split is underdetermined: {unknowns} unknowns for {samples} samples")]
    Underdetermined { unknowns: usize, samples: usize },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
