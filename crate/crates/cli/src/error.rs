use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] sel_core::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 ok, 2 cap exceeded, 3 configuration error, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Core(e) => match e {
                sel_core::Error::CapExceeded { .. } => 2,
                sel_core::Error::Invalid(_)
                | sel_core::Error::Parse(_)
                | sel_core::Error::Json(_)
                | sel_core::Error::MarginViolation { .. } => 3,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}
