use std::io;
use std::path::PathBuf;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),

    #[error("cannot write to {path}: {source}")]
    Output { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Experiment(#[from] ptide_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("selftest failed: {0} check(s)")]
    Selftest(usize),
}

impl LabError {
    /// 1 for experiment failures, 2 for config or output-location problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Output { .. } => 2,
            LabError::Experiment(_) | LabError::Io { .. } | LabError::Selftest(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}
