use std::path::PathBuf;

use crate::dynamics::RolloutTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("underdetermined fit: {samples} samples for {params} free parameters per dimension")]
    Underdetermined { samples: usize, params: usize },

    #[error("rank-deficient design matrix: numerical rank {rank} < {cols} columns (add ridge > 0 or use fewer segments)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("integration error at step {step}: {message}")]
    Integration { step: usize, message: String },

    #[error("rollout diverged at step {step}: distance {distance} exceeds {limit}")]
    Divergence {
        step: usize,
        distance: f64,
        limit: f64,
        trace: Box<RolloutTrace>,
    },

    #[error("{}", format_location(path, *line, message))]
    Format {
        path: Option<PathBuf>,
        line: Option<u64>,
        message: String,
    },

    #[error("model format version {found} is not supported (expected {expected}); upgrade required")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_location(path: &Option<PathBuf>, line: Option<u64>, message: &str) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("format error in {} line {}: {}", p.display(), l, message),
        (Some(p), None) => format!("format error in {}: {}", p.display(), message),
        (None, Some(l)) => format!("format error at line {l}: {message}"),
        (None, None) => format!("format error: {message}"),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: None,
            line,
            message: msg.into(),
        }
    }

    /// Attaches a file path to format errors.
    pub fn with_path(self, p: &std::path::Path) -> Self {
        match self {
            Error::Format { line, message, .. } => Error::Format {
                path: Some(p.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}
