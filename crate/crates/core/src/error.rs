use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} is outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("covariance matrix violates the uncertainty principle (symplectic eigenvalue {nu})")]
    Unphysical { nu: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("mode index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },

    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid passive environment: {0}")]
    InvalidPassiveEnv(String),

    #[error("encoding parameters violate the energy constraint: {0}")]
    Constraint(String),

    #[error("invalid scan specification: {0}")]
    InvalidScan(String),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("optimizer failed to converge: {0}")]
    Convergence(String),

    #[error("internal invariant failed: {0}")]
    Internal(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
