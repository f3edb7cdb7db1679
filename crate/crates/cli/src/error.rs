use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure at point {index} ({label}): {source}")]
    Numerical {
        index: usize,
        label: String,
        #[source]
        source: casimir::Error,
    },
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Output(_) => 2,
            Self::Numerical { .. } => 3,
        }
    }
}
