use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] oamwalk::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for rejected input, 3 for numerical failure, 4 for file system errors.
    pub fn exit_code(&self) -> u8 {
        use oamwalk::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::Validation { .. } | E::Window { .. } | E::ZeroEfficiency { .. } | E::AmplitudeRange { .. },
            ) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
