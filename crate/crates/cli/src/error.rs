use std::path::PathBuf;

use thiserror::Error;

/// Failures of the harness itself. Per-trial solver failures are recorded in
/// the output instead.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json export failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instance construction failed: {0}")]
    Instance(#[from] rqi_core::error::InstanceError),
}

impl BenchError {
    /// Process exit code: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        BenchError::Usage(msg.into())
    }
}
