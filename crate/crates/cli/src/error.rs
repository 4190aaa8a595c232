use std::fmt;

/// A command failure, split by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad input or an unmet precondition (exit 2).
    Input(String),
    /// A numeric evaluation failed (exit 1).
    Numeric(String),
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Failure {
        Failure::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

impl From<hsoliton_core::Error> for Failure {
    fn from(e: hsoliton_core::Error) -> Failure {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
