use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user input was violated.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("index {index} out of range for a lattice with {len} included points")]
    OutOfRange { index: usize, len: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{family} EC densities are available for d = 0..={max}, requested d = {d}")]
    Unsupported { family: String, d: usize, max: usize },

    /// Argument outside the domain of a density or distribution function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("LKC system is singular or too ill-conditioned to solve (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input (files, parameters), as opposed to
    /// numerical breakdowns during a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::EmptyDomain(_)
                | Error::OutOfRange { .. }
                | Error::Parse { .. }
                | Error::Unsupported { .. }
                | Error::Domain(_)
                | Error::Io(_)
        )
    }
}
