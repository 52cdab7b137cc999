use thiserror::Error;

use crate::config::Stage;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: solitonscope_core::Error,
    },

    #[error("artifact {path}: {reason}")]
    Artifact { path: String, reason: String },

    #[error(transparent)]
    Core(#[from] solitonscope_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn artifact(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Artifact {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Attach the stage name to a core error.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> CliResult<T>;
}

impl<T> AtStage<T> for solitonscope_core::Result<T> {
    fn at(self, stage: Stage) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
