use std::fmt;
use std::process::ExitCode;

/// Failures surfaced by the commands, mapped onto exit codes 2 and 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input, unreadable files, caps exceeded, infeasible parameters.
    Precondition(String),
    /// A certificate was computed and did not hold.
    Certification(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Precondition(_) => ExitCode::from(2),
            CliError::Certification(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Precondition(m) => write!(f, "precondition: {m}"),
            CliError::Certification(m) => write!(f, "certification failed: {m}"),
        }
    }
}

/// Wraps a module error as a precondition failure naming the module it came from.
pub fn from<E: fmt::Display>(module: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Precondition(format!("{module}: {e}"))
}

pub fn io(path: &std::path::Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Precondition(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = Result<T, CliError>;
