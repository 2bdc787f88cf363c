use thiserror::Error;

/// Problems with the invocation or its config; these exit with status 2.
#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{0}")]
    Arguments(String),
    #[error("cannot read config {path}: {reason}")]
    MissingConfig { path: String, reason: String },
    #[error("invalid config: {0}")]
    Config(String),
}

impl UsageError {
    pub fn kind(&self) -> &'static str {
        match self {
            UsageError::Arguments(_) => "usage",
            UsageError::MissingConfig { .. } => "missing-config",
            UsageError::Config(_) => "config",
        }
    }
}
