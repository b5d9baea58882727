use std::path::PathBuf;

use nbvsynth_core::completer::CompleterError;
use nbvsynth_core::image::ImageError;
use nbvsynth_core::metrics::MetricsError;
use nbvsynth_core::planner::PlanError;
use nbvsynth_core::pointcloud::CloudError;
use nbvsynth_core::GeometryError;

/// Errors that end a command, grouped by exit code.
#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Contract(String),
    #[error("{0}")]
    Transport(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Contract(_) => 3,
            CliError::Transport(_) => 4,
            CliError::Io { .. } | CliError::Internal(_) => 5,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CompleterError> for CliError {
    fn from(e: CompleterError) -> Self {
        match e {
            CompleterError::TransportError(_) => CliError::Transport(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Completer { step, source } => match CliError::from(source) {
                CliError::Transport(m) => CliError::Transport(format!("step {step}: {m}")),
                CliError::Contract(m) => CliError::Contract(format!("step {step}: {m}")),
                other => other,
            },
            PlanError::Cloud(c) => c.into(),
            PlanError::Geometry(g) => CliError::Internal(g.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<CloudError> for CliError {
    fn from(e: CloudError) -> Self {
        match e {
            CloudError::Io { path, source } => CliError::io(path, source),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::Io { path, source } => CliError::io(path, source),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Validation(e.to_string())
    }
}
