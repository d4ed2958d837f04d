use thiserror::Error;

/// Process exit codes.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Prefixes the message with the offending path.
    pub fn io_at(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<prnn::Error> for CliError {
    fn from(e: prnn::Error) -> Self {
        use prnn::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) | E::Parse { .. } => CliError::Io(msg),
            E::InvalidArgument(_) | E::DimensionMismatch(_) => CliError::Usage(msg),
            E::EigenFailure(_)
            | E::Numerical(_)
            | E::AmbiguousCluster { .. }
            | E::UnsupportedJordanStructure(_)
            | E::Domain(_)
            | E::EmptyReduction => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
