use thiserror::Error;

use qrcensus::analysis::AnalysisError;
use qrcensus::{NtError, PatternError, TableError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    #[error("{failures} verification check(s) failed")]
    VerificationFailed { failures: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<NtError> for CliError {
    fn from(e: NtError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Table(t) => t.into(),
            AnalysisError::Pattern(p) => p.into(),
            AnalysisError::KStarTooLarge { .. } | AnalysisError::AboveCap { .. } => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}
