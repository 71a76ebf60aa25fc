use std::path::PathBuf;

use thiserror::Error;

/// CLI failures. Each variant has its own exit code, listed in `--help`.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("config file {}: {msg}", path.display())]
    ConfigFile { path: PathBuf, msg: String },
    #[error("matrix {name}: {msg}")]
    Input { name: String, msg: String },
    #[error("cannot write {}: {msg}", path.display())]
    Output { path: PathBuf, msg: String },
    #[error("{0}")]
    Invariant(String),
    #[error("no convergence after {0} iterations")]
    NotConverged(usize),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 3,
            CliError::ConfigFile { .. } => 4,
            CliError::Input { .. } => 5,
            CliError::Output { .. } => 6,
            CliError::Invariant(_) => 7,
            CliError::NotConverged(_) => 8,
            CliError::Numerical(_) => 9,
            CliError::Resource(_) => 10,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

impl From<pgcomp_core::Error> for CliError {
    fn from(e: pgcomp_core::Error) -> Self {
        use pgcomp_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidArgument(_) | E::Degenerate(_) => CliError::Invalid(msg),
            E::Domain(_) | E::Numerical(_) => CliError::Numerical(msg),
            E::ResourceBound(_) => CliError::Resource(msg),
            E::Invariant(_) => CliError::Invariant(msg),
            E::Parse { .. } | E::Io(_) => CliError::Input {
                name: "input".into(),
                msg,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
