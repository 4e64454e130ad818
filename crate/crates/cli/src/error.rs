use thiserror::Error;

/// Exit status of a command whose checks all ran.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad file, bad schema, bad argument.
    #[error("{0}")]
    Input(String),
    /// A computation could not be completed.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<contactkit::Error> for CliError {
    fn from(e: contactkit::Error) -> Self {
        use contactkit::Error as E;
        match e {
            E::Expr(_) | E::Dimension(_) | E::InvalidInput(_) | E::InvalidSection(_) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
