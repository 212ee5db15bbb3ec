use thiserror::Error;

/// Exit status for input and validation failures.
pub const EXIT_INPUT: u8 = 2;
/// Exit status for numerical and internal failures.
pub const EXIT_FAILURE: u8 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failure(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: tohm_core::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Core { source, .. } if source.is_input_error() => EXIT_INPUT,
            CliError::Core { .. } => EXIT_FAILURE,
        }
    }
}

impl From<tohm_core::Error> for CliError {
    fn from(source: tohm_core::Error) -> Self {
        CliError::Core { context: "error".into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a short description of the failing step to core errors.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T>;
}

impl<T> Context<T> for tohm_core::Result<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what.into(), source })
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
