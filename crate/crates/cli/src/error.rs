use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Sim(#[from] relaysched::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("oracle mismatch: expected variance 130, maxsnr 90; got variance {variance}, maxsnr {maxsnr}")]
    OracleMismatch { variance: f64, maxsnr: f64 },
}

pub type Result<T> = std::result::Result<T, CliError>;
