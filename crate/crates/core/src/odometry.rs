//! Dead-reckoning integration of relative motions and the translation /
//! rotation balanced odometry loss.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{relative_between, Pose2, RelativeMotion};

/// Poses indexed by timestep `0..len`. Never empty; `poses[0]` is the origin.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    poses: Vec<Pose2>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose2>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        Ok(Trajectory { poses })
    }

    pub fn origin(&self) -> Pose2 {
        self.poses[0]
    }

    pub fn poses(&self) -> &[Pose2] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn get(&self, timestep: usize) -> Option<&Pose2> {
        self.poses.get(timestep)
    }

    pub fn last(&self) -> Pose2 {
        self.poses[self.poses.len() - 1]
    }

    /// `(timestep, pose)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Pose2)> {
        self.poses.iter().enumerate()
    }

    pub fn into_poses(self) -> Vec<Pose2> {
        self.poses
    }

    pub(crate) fn poses_mut(&mut self) -> &mut [Pose2] {
        &mut self.poses
    }

    /// Body-frame motions between consecutive poses.
    pub fn motions(&self) -> Vec<RelativeMotion> {
        self.poses
            .windows(2)
            .map(|w| relative_between(&w[0], &w[1]))
            .collect()
    }

    /// Cumulative traveled distance at every timestep, starting at zero.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.poses.len());
        out.push(0.0);
        for w in self.poses.windows(2) {
            acc += w[0].planar_distance(&w[1]);
            out.push(acc);
        }
        out
    }

    pub fn path_length(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|w| w[0].planar_distance(&w[1]))
            .sum()
    }

    /// Applies the rigid transform `frame` to every pose (`frame ∘ pose`).
    pub fn transformed(&self, frame: &Pose2) -> Trajectory {
        Trajectory {
            poses: self.poses.iter().map(|p| frame.compose_pose(p)).collect(),
        }
    }
}

/// Integrates body-frame motions from `origin`; the result has
/// `motions.len() + 1` poses.
pub fn integrate(origin: Pose2, motions: &[RelativeMotion]) -> Trajectory {
    let mut poses = Vec::with_capacity(motions.len() + 1);
    let mut current = origin;
    poses.push(current);
    for m in motions {
        current = current.compose(m);
        poses.push(current);
    }
    Trajectory { poses }
}

/// `‖Δt̂ − Δt‖₂ + β‖Δr̂ − Δr‖₂` over the translation pair and the
/// sine/cosine pair. Norms are not squared.
pub fn vo_loss(pred: &RelativeMotion, truth: &RelativeMotion, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: "must be finite and > 0",
        });
    }
    let translation = libm::hypot(pred.dx() - truth.dx(), pred.dy() - truth.dy());
    let rotation = libm::hypot(
        pred.sin_dtheta() - truth.sin_dtheta(),
        pred.cos_dtheta() - truth.cos_dtheta(),
    );
    Ok(translation + beta * rotation)
}
