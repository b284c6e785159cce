//! Windowed drift metrics: translation error in percent of the traveled
//! window and rotation error in degrees per meter, as a function of window
//! length, plus absolute per-pose errors.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{angular_error, relative_between};
use crate::odometry::Trajectory;

/// Default window lengths in meters; lengths beyond the path are skipped.
pub const DEFAULT_SUB_LENGTHS: [f64; 6] = [10.0, 25.0, 50.0, 100.0, 150.0, 200.0];

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct LengthError {
    pub sub_length: f64,
    pub trans_pct: f64,
    pub rot_deg_per_m: f64,
    /// Number of start indices averaged.
    pub windows: usize,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub avg_translation_pct: f64,
    pub avg_rotation_deg_per_m: f64,
    pub per_length: Vec<LengthError>,
    pub endpoint_error: f64,
    /// Requested lengths longer than the ground-truth path.
    pub skipped: Vec<f64>,
}

fn check_pair(estimate: &Trajectory, truth: &Trajectory) -> Result<()> {
    if estimate.len() != truth.len() {
        return Err(Error::LengthMismatch {
            estimate: estimate.len(),
            truth: truth.len(),
        });
    }
    Ok(())
}

/// Mean windowed errors of `estimate` against `truth`.
///
/// For each length `L` and each start index `i`, the window ends at the
/// first index whose ground-truth arc length from `i` reaches `L`. Both
/// trajectories' displacements over the window are taken in their own start
/// frame; the translation error is the norm of their difference over `L`,
/// the rotation error the wrapped heading-change difference over `L`.
pub fn evaluate(
    estimate: &Trajectory,
    truth: &Trajectory,
    sub_lengths: &[f64],
) -> Result<ErrorReport> {
    check_pair(estimate, truth)?;
    if sub_lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "sub_lengths",
            reason: "must be finite and > 0",
        });
    }
    let arc = truth.arc_lengths();
    let total = arc[arc.len() - 1];
    let est = estimate.poses();
    let gt = truth.poses();

    let mut per_length = Vec::new();
    let mut skipped = Vec::new();
    for &len in sub_lengths {
        if len > total {
            skipped.push(len);
            continue;
        }
        let mut trans = 0.0;
        let mut rot = 0.0;
        let mut windows = 0usize;
        for i in 0..arc.len() {
            let target = arc[i] + len;
            let j = arc.partition_point(|&a| a < target);
            if j >= arc.len() {
                break;
            }
            let re = relative_between(&est[i], &est[j]);
            let rt = relative_between(&gt[i], &gt[j]);
            trans += libm::hypot(re.dx() - rt.dx(), re.dy() - rt.dy()) / len;
            rot += angular_error(re.dtheta(), rt.dtheta()) / len;
            windows += 1;
        }
        if windows == 0 {
            skipped.push(len);
            continue;
        }
        per_length.push(LengthError {
            sub_length: len,
            trans_pct: 100.0 * trans / windows as f64,
            rot_deg_per_m: rot.to_degrees() / windows as f64,
            windows,
        });
    }
    if per_length.is_empty() {
        return Err(Error::NoValidWindows { path_length: total });
    }
    let k = per_length.len() as f64;
    let avg_translation_pct = per_length.iter().map(|e| e.trans_pct).sum::<f64>() / k;
    let avg_rotation_deg_per_m = per_length.iter().map(|e| e.rot_deg_per_m).sum::<f64>() / k;
    Ok(ErrorReport {
        avg_translation_pct,
        avg_rotation_deg_per_m,
        per_length,
        endpoint_error: estimate.last().planar_distance(&truth.last()),
        skipped,
    })
}

/// Absolute translation error at every timestep.
pub fn pose_errors(estimate: &Trajectory, truth: &Trajectory) -> Result<Vec<f64>> {
    check_pair(estimate, truth)?;
    Ok(estimate
        .poses()
        .iter()
        .zip(truth.poses())
        .map(|(e, t)| e.planar_distance(t))
        .collect())
}

/// Largest absolute translation error over the trajectory.
pub fn max_translation_error(estimate: &Trajectory, truth: &Trajectory) -> Result<f64> {
    Ok(pose_errors(estimate, truth)?
        .into_iter()
        .fold(0.0, f64::max))
}
