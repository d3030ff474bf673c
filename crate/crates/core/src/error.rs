use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller combined arguments that cannot be used together.
    #[error("usage error: {0}")]
    Usage(String),

    /// A scene violates one of its invariants; `field` names the offending entry.
    #[error("invalid scene: `{field}`: {message}")]
    Scene { field: String, message: String },

    #[error("scene parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("infeasible path: {0}")]
    InfeasiblePath(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn scene(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scene {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
