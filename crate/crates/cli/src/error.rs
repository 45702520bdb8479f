use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output: {0}")]
    Output(#[from] std::io::Error),

    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Output(_) | CliError::Parse(_) => 1,
            CliError::Domain(_) => 2,
        }
    }
}

impl From<qmeter::Error> for CliError {
    fn from(e: qmeter::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}
