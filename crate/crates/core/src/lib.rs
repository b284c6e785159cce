//! Topometric localization on SE(2).
//!
//! Relative odometry is integrated into a metric trajectory whose drift is
//! corrected by sparse, confidence-weighted detections of globally
//! referenced topological nodes. Correction runs in three stages:
//! a forward snap-and-propagate step at every confident detection, an
//! exponentially decayed backward adjustment of the preceding poses, and a
//! final locally weighted quadratic smoothing pass over translation.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! parsing and the experiment CLI live in the `topometric` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fusion;
pub mod geometry;
pub mod metrics;
pub mod odometry;
pub mod simulator;
pub mod topo_map;

pub use error::{Error, Result};
pub use fusion::{fuse, CorrectionState, FusionConfig};
pub use geometry::{angular_error, normalize_angle, Pose2, RelativeMotion};
pub use metrics::{evaluate, ErrorReport, LengthError};
pub use odometry::{integrate, vo_loss, Trajectory};
pub use simulator::{DetectorModel, OdometryNoiseModel, PathKind, Scenario, ScenarioParams};
pub use topo_map::{NodeDetection, TopoMap, TopoNode};
