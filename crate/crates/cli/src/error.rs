use std::fmt;

use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Core(vertexbound::Error),
}

impl From<vertexbound::Error> for CliError {
    fn from(e: vertexbound::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Machine-readable error object written in place of a report.
#[derive(Debug, Serialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use vertexbound::Error as E;
        match self {
            CliError::Parse(_) | CliError::Core(E::InvalidSpec(_)) => 2,
            CliError::Core(E::Truncation(_)) => 3,
            CliError::Core(E::NotCofiniteUpToDepth { .. }) => 4,
            CliError::Core(E::IrregularSingularity(_)) => 5,
            CliError::Core(E::InputShape(_)) => 6,
            CliError::Core(E::LogDepthExceeded { .. }) => 7,
            CliError::Io(_) | CliError::Core(E::InternalInvariantViolation(_)) => 1,
        }
    }

    pub fn object(&self) -> ErrorObject {
        ErrorObject { kind: self.kind().into(), message: self.to_string(), exit_code: self.exit_code() }
    }
}
