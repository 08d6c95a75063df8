use std::path::PathBuf;

use thiserror::Error;

/// Every variant maps to exit code 2: the run could not be carried out.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read mesh {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: hypercurv::Error,
    },
    #[error(transparent)]
    Core(#[from] hypercurv::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report serialization failed: {0}")]
    Serialize(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
