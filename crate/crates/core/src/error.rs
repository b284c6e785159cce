use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("rotation components violate the unit circle by {deviation:e}")]
    NotUnitCircle { deviation: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("topological map is empty")]
    EmptyMap,
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("timestep {timestep} outside trajectory of {len} poses")]
    TimestepOutOfRange { timestep: usize, len: usize },
    #[error("detections must have strictly increasing timesteps (at {0})")]
    UnorderedDetections(usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all local regression weights are zero at index {0}")]
    ZeroWeights(usize),
    #[error("singular local regression system at index {0}")]
    Singular(usize),
    #[error("trajectories differ in length ({estimate} vs {truth})")]
    LengthMismatch { estimate: usize, truth: usize },
    #[error("no sub-length fits inside a path of {path_length} m")]
    NoValidWindows { path_length: f64 },
    #[error("unknown path kind")]
    UnknownPathKind,
}
