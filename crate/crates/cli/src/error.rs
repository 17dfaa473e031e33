use serde::Serialize;

use shrink_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Bad flags, config file, spec string or input file.
    Config,
    /// A declared inequality failed its check.
    CheckFailed,
    /// Newton or the flow did not reach its target.
    NonConvergence,
    /// The numerics refused to continue (convexity loss, blow-up).
    Numerical,
    Io,
}

/// Error reported on stderr as a JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        let exit_code = if kind == ErrorKind::Config { 2 } else { 1 };
        Self {
            kind,
            message: message.into(),
            exit_code,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let kind = match &err {
            Error::Parse { .. }
            | Error::Construction(_)
            | Error::Dimension { .. }
            | Error::Domain { .. }
            | Error::Profile { .. }
            | Error::Ambient(_)
            | Error::Convexity { .. } => ErrorKind::Config,
            Error::NonConvergence { .. } => ErrorKind::NonConvergence,
            Error::StepRejected { .. } | Error::BlowUp { .. } => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
        };
        Self::new(kind, err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, err.to_string())
    }
}
