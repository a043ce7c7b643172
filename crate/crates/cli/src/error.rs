use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{at}: {source}")]
    Core {
        at: String,
        #[source]
        source: ldis_core::Error,
    },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn core(at: impl Into<String>, source: ldis_core::Error) -> Self {
        CliError::Core { at: at.into(), source }
    }

    /// 2 validation, 3 numerical failure, 4 budget, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core { source, .. } => match source {
                ldis_core::Error::Budget(_) => 4,
                e if e.is_validation() => 2,
                _ => 3,
            },
        }
    }
}
