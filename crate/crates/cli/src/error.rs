use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hcrep::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("amplitude norm {0} deviates from 1 by more than 1e-6")]
    NormViolation(f64),
    #[error("expected {expected} amplitudes, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("basis `{0}` is neither a preset nor an existing file")]
    UnknownBasis(String),
    #[error("invalid basis argument `{0}`, expected <entity>=<preset|path>")]
    BasisArgument(String),
    #[error("missing --{0}")]
    MissingArgument(&'static str),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "Io",
            CliError::Parse(_) => "MalformedDocument",
            CliError::NormViolation(_) => "NormViolation",
            CliError::LengthMismatch { .. } => "LengthMismatch",
            CliError::UnknownBasis(_) => "UnknownBasis",
            CliError::BasisArgument(_) => "BasisArgument",
            CliError::MissingArgument(_) => "MissingArgument",
        }
    }
}
