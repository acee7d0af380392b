use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical invariant failed: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 1 for configuration and I/O problems, 2 for a
    /// numerical invariant breaking mid-run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<mvsim_core::Error> for CliError {
    fn from(e: mvsim_core::Error) -> Self {
        use mvsim_core::Error as E;
        match e {
            E::NotHermitian(_)
            | E::InvalidTrace(_)
            | E::NegativeEigenvalue(_)
            | E::Solver(_)
            | E::InvariantViolation(_)
            | E::NotNormalized(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
