use thiserror::Error;

/// Errors raised by the numeric routines and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {terms} terms > max_terms {max_terms} (raise prune_tol)")]
    Capacity { terms: usize, max_terms: usize },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("Neumann series diverges: ||H||_W = {h_norm:.6} >= 1 at height {height} (try a larger height)")]
    Divergence { h_norm: f64, height: f64 },

    #[error("no convergence after {iterations} iterations: {what}")]
    Convergence { what: String, iterations: usize },

    #[error("function has no zeros: {0}")]
    NoZeros(String),

    #[error("zero within {tol:e} of window boundary at x = {x} (shift the window)")]
    BoundaryZero { x: f64, tol: f64 },

    #[error("contour passes within margin of a zero near {re} + {im}i (perturb the rectangle)")]
    ContourTooClose { re: f64, im: f64 },

    #[error("empty point set")]
    EmptySet,

    #[error("window too short: {0}")]
    WindowTooShort(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {message}; required window half-length ~ {required_half_length:.3}")]
    InsufficientData {
        message: String,
        required_half_length: f64,
    },

    #[error("t3 budget exceeded: sum |b|/gamma over (0,1) = {t3:e} > budget {budget:e}")]
    T3Budget { t3: f64, budget: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
