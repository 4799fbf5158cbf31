use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] steklov_core::Error),

    #[error("config file: {0}")]
    Config(#[from] toml::de::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    /// 2 for a failed verification, 1 for every input or runtime error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 2,
            _ => 1,
        }
    }
}
