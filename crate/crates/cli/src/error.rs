use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::json;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad arguments or unreadable, malformed or inconsistent inputs.
    Input,
    /// A feature or statistic could not be computed.
    Compute,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    pub path: Option<PathBuf>,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Input,
            message: message.into(),
            path: None,
        }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Compute,
            message: message.into(),
            path: None,
        }
    }

    pub fn at(mut self, path: impl AsRef<Path>) -> Self {
        if self.path.is_none() {
            self.path = Some(path.as_ref().to_path_buf());
        }
        self
    }

    pub fn io(path: impl AsRef<Path>, err: std::io::Error) -> Self {
        CliError::input(format!("{}: {err}", path.as_ref().display())).at(path)
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Input => EXIT_USAGE,
            Kind::Compute => EXIT_COMPUTE,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": match self.kind {
                    Kind::Input => "input",
                    Kind::Compute => "computation",
                },
                "exit_code": self.exit_code(),
                "message": self.message,
                "path": self.path.as_ref().map(|p| p.display().to_string()),
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<radiomics::Error> for CliError {
    fn from(err: radiomics::Error) -> Self {
        use radiomics::Error as E;
        let kind = match &err {
            E::Io { .. }
            | E::Header { .. }
            | E::SizeMismatch { .. }
            | E::NonFinite { .. }
            | E::EmptyMask
            | E::DimsMismatch { .. }
            | E::InvalidParameter(_) => Kind::Input,
            E::EmptyRoi
            | E::EmptyMatrix(_)
            | E::InsufficientData { .. }
            | E::NonPositive { .. }
            | E::Degenerate(_) => Kind::Compute,
        };
        CliError {
            kind,
            path: err.path().map(Path::to_path_buf),
            message: err.to_string(),
        }
    }
}
