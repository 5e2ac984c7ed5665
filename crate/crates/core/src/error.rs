use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("session {session_id} is invalid: {}", format_violations(.violations))]
    InvalidSession {
        session_id: String,
        violations: Vec<Violation>,
    },

    #[error("utterance group is empty")]
    EmptyGroup,

    #[error("utterance {0} has no transcript")]
    EmptyTranscript(String),

    #[error("reference map is empty")]
    EmptyReferences,

    #[error("total reference word count is zero")]
    ZeroReferenceWords,

    #[error("no hypothesis for {0}")]
    MissingHypothesis(String),

    #[error("hypothesis for unknown id {0}")]
    UnknownHypothesis(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("infeasible pool: {0}")]
    InfeasiblePool(String),

    #[error("no audio for source {0}")]
    MissingAudio(String),

    #[error("sample rate mismatch for {source_id}: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch {
        source_id: String,
        expected: u32,
        actual: u32,
    },

    #[error("speed factor must be positive, got {0}")]
    NonPositiveSpeed(f64),

    #[error("{0}")]
    Mismatch(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
}

impl Error {
    /// True for failures caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Wav { source: hound::Error::IoError(_), .. })
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
