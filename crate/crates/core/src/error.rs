use thiserror::Error;

use crate::array::Geometry2D;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 antennas, got {0}")]
    TooFewAntennas(usize),

    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    #[error("spatial angle out of range: {0}")]
    AngleOutOfRange(String),

    #[error("invalid scene parameter: {0}")]
    InvalidScene(String),

    #[error("infeasible segment: {0}")]
    InfeasibleSegment(String),

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("reference point has coincident antennas {0} and {1}; perturbation required")]
    CoincidentReference(usize, usize),

    #[error("malformed conic program: {0}")]
    MalformedProgram(String),

    #[error("subproblem solve failed at outer iteration {iteration} ({phase} phase): {status}")]
    SubproblemFailed {
        iteration: usize,
        phase: &'static str,
        status: String,
        last_feasible: Box<Geometry2D>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no rows to emit")]
    EmptyRows,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
