use std::path::PathBuf;

use thiserror::Error;

use crate::grid::Position;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("maze text: line {line}: {msg}")]
    MazeFormat { line: usize, msg: String },

    #[error("q-table dump: line {line}: {msg}")]
    QTableFormat { line: usize, msg: String },

    #[error("trajectory: line {line}: {msg}")]
    TrajectoryFormat { line: usize, msg: String },

    /// The spiral ran out of unvisited cells and backtrack history while the
    /// episode was still running. Only possible on a disconnected maze.
    #[error("explorer stuck at {0:?}: no unvisited reachable cell remains")]
    Stuck(Position),

    #[error("no path from {from:?} to {to:?} even under freespace assumption")]
    NoPath { from: Position, to: Position },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
