use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("kernel iteration did not converge after {iterations} iterations (last increment {last_increment:.3e})")]
    KernelNonConvergence { iterations: usize, last_increment: f64 },

    #[error("kernel polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("point ({x}, {y}) lies outside the triangle 0 <= x <= y <= {length}")]
    Domain { x: f64, y: f64, length: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular linear system (pivot {pivot:.3e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("nonlinear inner iteration failed at step {step}: {iterations} iterations, correction {correction:.3e}")]
    InnerNonConvergence { step: usize, iterations: usize, correction: f64 },

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Domain { .. } | Error::GridMismatch(_) => 2,
            Error::KernelNonConvergence { .. } | Error::DegreeCap { .. } => 3,
            Error::Singular { .. } | Error::InnerNonConvergence { .. } | Error::NonFinite { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
