use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },
    #[error(transparent)]
    Core(#[from] wglab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn format(what: &'static str, reason: impl Into<String>) -> Self {
        LabError::Format { what, reason: reason.into() }
    }
}

pub type LabResult<T> = Result<T, LabError>;
