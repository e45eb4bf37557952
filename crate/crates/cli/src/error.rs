use std::fmt;

/// Exit status classes: 2 usage, 3 input, 4 invariant.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Input(anyhow::Error),
    Invariant(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            CliError::Usage(e) => ("usage", e),
            CliError::Input(e) => ("input", e),
            CliError::Invariant(e) => ("invariant", e),
        };
        write!(f, "{kind} error: {e:#}")
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

pub trait Classify<T> {
    fn input(self) -> CliResult<T>;
    fn invariant(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> CliResult<T> {
        self.map_err(|e| CliError::Input(e.into()))
    }

    fn invariant(self) -> CliResult<T> {
        self.map_err(|e| CliError::Invariant(e.into()))
    }
}
