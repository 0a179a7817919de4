//! Error categories, exit codes and the JSON error record on stderr.

use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use sparsepath::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Anything not covered below.
    Runtime,
    /// Bad command line, config schema violation or invalid parameter values.
    InvalidConfig,
    /// An input file or directory does not exist.
    MissingInput,
    /// The solver diverged.
    Divergence,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Runtime => 1,
            Kind::InvalidConfig => 2,
            Kind::MissingInput => 3,
            Kind::Divergence => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

#[derive(Serialize)]
struct Record<'a> {
    error: Kind,
    exit_code: u8,
    message: &'a str,
}

impl CliError {
    pub fn new(kind: Kind, message: String) -> Self {
        Self { kind, message }
    }

    pub fn config(message: String) -> Self {
        Self::new(Kind::InvalidConfig, message)
    }

    pub fn runtime(err: impl std::fmt::Display) -> Self {
        Self::new(Kind::Runtime, err.to_string())
    }

    /// Failure to read an input: a missing path gets its own exit code.
    pub fn input_io(path: &Path, err: std::io::Error) -> Self {
        let kind = if err.kind() == std::io::ErrorKind::NotFound {
            Kind::MissingInput
        } else {
            Kind::Runtime
        };
        Self::new(kind, format!("cannot read {}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        self.kind.exit_code()
    }

    /// Prints the one-line JSON record and returns the exit code.
    pub fn report(&self) -> ExitCode {
        let record = Record {
            error: self.kind,
            exit_code: self.exit_code(),
            message: &self.message,
        };
        eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
        ExitCode::from(self.exit_code())
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let kind = match &err {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => Kind::MissingInput,
            Error::Divergence { .. } => Kind::Divergence,
            Error::InvalidOperator(_)
            | Error::NegativeLambda(_)
            | Error::InvalidConfig(_)
            | Error::InvalidTheory(_)
            | Error::StepsizeOutOfRange { .. }
            | Error::InvalidProblem(_)
            | Error::InvalidExperiment(_)
            | Error::CoherenceOverBudget { .. } => Kind::InvalidConfig,
            _ => Kind::Runtime,
        };
        Self::new(kind, err.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_distinct_codes() {
        let missing = Error::Io {
            path: "x".into(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        };
        assert_eq!(CliError::from(missing).exit_code(), 3);
        assert_eq!(CliError::from(Error::Divergence { lambda: 1.0, k: 2 }).exit_code(), 4);
        assert_eq!(CliError::from(Error::InvalidConfig("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::ZeroReference).exit_code(), 1);
    }
}
