//! Experiment driver for `sfft-core`: planted signals, seeded runs, CSV/JSON
//! output, measurement dumps and the acceptance suite behind `sfft-lab selftest`.

pub mod acceptance;
pub mod dump;
pub mod experiment;
pub mod output;
pub mod signal;

use std::path::PathBuf;

/// Errors surfaced by the lab crate.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("core: {0}")]
    Core(sfft_core::Error),
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("malformed dump: {0}")]
    Dump(String),
}

impl From<sfft_core::Error> for LabError {
    fn from(e: sfft_core::Error) -> Self {
        LabError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}
