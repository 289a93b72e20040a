use std::fmt::Display;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Data {
        stage: &'static str,
        message: String,
    },
    #[error("missing {}; run `filingtopics {command}` first", artifact.display())]
    Prerequisite {
        artifact: PathBuf,
        command: &'static str,
    },
    #[error("{stage}: internal invariant violated: {message}")]
    Invariant {
        stage: &'static str,
        message: String,
    },
}

impl PipelineError {
    /// 1 usage/config (including missing prerequisites), 2 data, 3 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Prerequisite { .. } => 1,
            PipelineError::Data { .. } => 2,
            PipelineError::Invariant { .. } => 3,
        }
    }

    pub fn data(stage: &'static str, message: impl Display) -> Self {
        PipelineError::Data {
            stage,
            message: message.to_string(),
        }
    }
}

pub(crate) trait InStage<T> {
    fn in_stage(self, stage: &'static str) -> Result<T, PipelineError>;
}

impl<T, E: Display> InStage<T> for Result<T, E> {
    fn in_stage(self, stage: &'static str) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::data(stage, e))
    }
}
