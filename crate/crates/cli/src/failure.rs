use thiserror::Error;

/// Command failures, grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Scene(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    pub const USAGE: u8 = 2;
    pub const SCENE: u8 = 3;
    pub const RUNTIME: u8 = 4;

    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => Self::USAGE,
            Failure::Scene(_) => Self::SCENE,
            Failure::Runtime(_) => Self::RUNTIME,
        }
    }
}

impl From<escape_energy::Error> for Failure {
    fn from(err: escape_energy::Error) -> Self {
        use escape_energy::Error;
        match err {
            Error::Usage(_) => Failure::Usage(err.to_string()),
            Error::Scene { .. } | Error::Parse { .. } => Failure::Scene(err.to_string()),
            Error::InfeasiblePath(_) | Error::Io(_) | Error::Csv(_) => {
                Failure::Runtime(err.to_string())
            }
        }
    }
}
