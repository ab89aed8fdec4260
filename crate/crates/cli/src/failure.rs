use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

/// A run failure with its exit code: 1 configuration, 2 validation, 3 computation.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config { kind: String, message: String },
    Validation { message: String },
    Module(hfscatter::Error),
    Io(String),
}

#[derive(Serialize)]
struct Record<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

impl Failure {
    pub fn config(kind: &str, message: impl Into<String>) -> Self {
        Failure::Config {
            kind: kind.into(),
            message: message.into(),
        }
    }

    /// A core error raised while checking the configuration.
    pub fn config_from(err: hfscatter::Error) -> Self {
        Failure::Config {
            kind: err.kind().into(),
            message: err.to_string(),
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            Failure::Config { kind, .. } => kind,
            Failure::Validation { .. } => "ValidationFailure",
            Failure::Module(e) => e.kind(),
            Failure::Io(_) => "IoError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config { .. } => 1,
            Failure::Validation { .. } => 2,
            Failure::Module(_) | Failure::Io(_) => 3,
        }
    }

    pub fn record(&self) -> String {
        let record = Record {
            kind: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        };
        serde_json::to_string_pretty(&record).expect("record serializes") + "\n"
    }

    /// Writes `error.json` into `dir` when possible.
    pub fn write_record(&self, dir: &Path) {
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(dir.join("error.json"), self.record());
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config { message, .. } => f.write_str(message),
            Failure::Validation { message } => f.write_str(message),
            Failure::Module(e) => write!(f, "{e}"),
            Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<hfscatter::Error> for Failure {
    fn from(e: hfscatter::Error) -> Self {
        Failure::Module(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
