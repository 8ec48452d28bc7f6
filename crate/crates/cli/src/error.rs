use thiserror::Error;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: agromcda::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for configuration or input validation, 2 for I/O, 3 for numeric or
    /// consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Core { source, .. } if source.is_numeric() => 3,
            CliError::Core { .. } => 1,
        }
    }
}

/// Attach a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for agromcda::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what.into(),
            source,
        })
    }
}
