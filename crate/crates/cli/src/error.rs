use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cqed_gates::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("output encoding failed: {0}")]
    Encode(String),
}

impl CliError {
    /// 2: input or parse error, 3: physics precondition, 4: solver failure.
    pub fn exit_code(&self) -> i32 {
        use cqed_gates::Error as E;
        match self {
            CliError::Core(E::Parse(_)) | CliError::Read { .. } | CliError::Usage(_) => 2,
            CliError::Core(E::Precondition(_) | E::Layout(_) | E::DimensionMismatch { .. }) => 3,
            CliError::Core(E::Solver(_)) => 4,
            CliError::Write { .. } | CliError::Encode(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
