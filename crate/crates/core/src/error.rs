use crate::scenario::{BsId, Point2};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not place {requested} base stations with {spacing} m per-axis spacing inside the bounds")]
    PlacementFailed { requested: usize, spacing: f64 },

    #[error("unknown base station id {0}")]
    UnknownBs(BsId),

    #[error("evaluation point {0} coincides with a base station")]
    Singular(Point2),

    #[error("need at least {required} base stations, got {got}")]
    InsufficientGeometry { required: usize, got: usize },

    #[error("degenerate geometry (condition number {condition:.3e})")]
    DegenerateGeometry { condition: f64 },

    #[error("steepest descent diverged after {iterations} iterations")]
    Divergence { iterations: usize },

    #[error("no line-of-sight base station available")]
    NoLos,

    #[error("PRS detection failed for base station {0}: all beam pairs below the noise floor")]
    DetectionFailure(BsId),

    #[error("empty input")]
    EmptyInput,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("scenario/config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("scenario/config serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),
}
