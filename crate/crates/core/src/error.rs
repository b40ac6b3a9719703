use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    /// One entry per violated invariant, each naming the offending entity.
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("no cluster with at least {min_size} points inside the region of interest")]
    NoCluster { min_size: usize },

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("joint limit violation: {0}")]
    JointLimit(String),

    #[error("start and goal positions coincide")]
    ZeroDistance,

    #[error("illegal event {event} in state {state}")]
    IllegalTransition { state: String, event: String },

    #[error("planning failed after {iterations} iterations: {reason}")]
    PlanningFailed { iterations: usize, reason: String },

    #[error("not enough samples: {0}")]
    NotEnoughSamples(&'static str),

    #[error("unknown object label '{0}'")]
    UnknownLabel(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Errors caused by bad user input (configuration or arguments) rather
    /// than by a failure while running.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Validation(_) | Error::UnknownLabel(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
