use hypflow::HypflowError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const VERIFICATION: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BREAKDOWN: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Module {
        stage: &'static str,
        #[source]
        source: HypflowError,
    },
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn module(stage: &'static str, source: HypflowError) -> Self {
        Self::Module { stage, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Module { source, .. } if source.is_breakdown() => exit::BREAKDOWN,
            _ => exit::USAGE,
        }
    }
}
