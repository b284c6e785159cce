//! Topometric fusion of integrated odometry with topological node matches.
//!
//! The correction runs as three stages:
//!
//! 1. **Forward**: a detection whose confidence exceeds `delta` snaps the
//!    current pose onto the matched node. The rigid correction that achieves
//!    this is kept and applied to every later integrated pose until the next
//!    confident detection replaces it.
//! 2. **Backward**: the residual seen at that detection is fed back into the
//!    preceding `t_w` poses, scaled by `exp(-λ·k)` for a pose `k` steps back,
//!    with separate rates for translation and heading. Inside the online
//!    pass the window stops just after the previous confident detection,
//!    whose pose is already pinned to its node.
//! 3. **Smoothing**: once the pass is complete, x and y are each replaced by
//!    a locally weighted quadratic regression (see [`loess`]) and blended
//!    with the corrected path by `λ_s / (1 + λ_s)`. Headings are untouched.

pub mod loess;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, angular_error, relative_between, Pose2, RelativeMotion};
use crate::odometry::Trajectory;
use crate::topo_map::{NodeDetection, TopoMap};

/// Tunables of the fusion pipeline.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    delta: f64,
    lambda_s: f64,
    lambda_tr: f64,
    lambda_theta: f64,
    t_w: usize,
    bandwidth: f64,
    gate_radius: f64,
    gate_heading: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            delta: 0.9,
            lambda_s: 1.0,
            lambda_tr: 0.5,
            lambda_theta: 0.5,
            t_w: 10,
            bandwidth: 0.1,
            gate_radius: 1.5,
            gate_heading: core::f64::consts::FRAC_PI_4,
        }
    }
}

fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}

impl FusionConfig {
    /// Keys accepted by [`FusionConfig::set`].
    pub const KEYS: [&'static str; 8] = [
        "delta",
        "lambda_s",
        "lambda_tr",
        "lambda_theta",
        "t_w",
        "bandwidth",
        "gate_radius",
        "gate_heading",
    ];

    pub fn new(
        delta: f64,
        lambda_s: f64,
        lambda_tr: f64,
        lambda_theta: f64,
        t_w: usize,
        bandwidth: f64,
    ) -> Result<Self> {
        let cfg = FusionConfig {
            delta,
            lambda_s,
            lambda_tr,
            lambda_theta,
            t_w,
            bandwidth,
            ..FusionConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", "must lie in (0, 1]"));
        }
        for (name, v) in [
            ("lambda_s", self.lambda_s),
            ("lambda_tr", self.lambda_tr),
            ("lambda_theta", self.lambda_theta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        if self.t_w < 1 {
            return Err(invalid("t_w", "must be >= 1"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth <= 1.0) {
            return Err(invalid("bandwidth", "must lie in (0, 1]"));
        }
        if self.gate_radius.is_nan() || self.gate_radius <= 0.0 {
            return Err(invalid("gate_radius", "must be > 0 (may be infinite)"));
        }
        if self.gate_heading.is_nan() || self.gate_heading <= 0.0 {
            return Err(invalid("gate_heading", "must be > 0 (may be infinite)"));
        }
        Ok(())
    }

    /// Sets one parameter by name; the result is validated before it is
    /// stored, so a failed call leaves `self` unchanged.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let mut next = *self;
        match key {
            "delta" => next.delta = value,
            "lambda_s" => next.lambda_s = value,
            "lambda_tr" => next.lambda_tr = value,
            "lambda_theta" => next.lambda_theta = value,
            "t_w" => {
                if !(value.is_finite() && value >= 1.0 && libm::trunc(value) == value) {
                    return Err(invalid("t_w", "must be an integer >= 1"));
                }
                next.t_w = value as usize;
            }
            "bandwidth" => next.bandwidth = value,
            "gate_radius" => next.gate_radius = value,
            "gate_heading" => next.gate_heading = value,
            _ => return Err(invalid("key", "unknown fusion parameter")),
        }
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn with(mut self, key: &str, value: f64) -> Result<Self> {
        self.set(key, value)?;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }
    pub fn lambda_tr(&self) -> f64 {
        self.lambda_tr
    }
    pub fn lambda_theta(&self) -> f64 {
        self.lambda_theta
    }
    pub fn t_w(&self) -> usize {
        self.t_w
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    /// Largest distance between the predicted pose and a matched node for
    /// the match to be used. Infinite disables the check.
    pub fn gate_radius(&self) -> f64 {
        self.gate_radius
    }
    /// Largest heading difference, in radians, between the predicted pose
    /// and a matched node. Rejects nodes laid down on a crossing pass.
    pub fn gate_heading(&self) -> f64 {
        self.gate_heading
    }

    /// Weight of the smoothed path in the final blend.
    pub fn smoothing_weight(&self) -> f64 {
        self.lambda_s / (1.0 + self.lambda_s)
    }
}

/// World-frame difference `node − pose` observed at a confident detection.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseOffset {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Anchor {
    raw: Pose2,
    node: Pose2,
}

/// Loop-carried state of the forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorrectionState {
    offset: PoseOffset,
    anchor: Option<Anchor>,
    last_confident: Option<(usize, usize)>,
}

impl CorrectionState {
    /// Offset recorded at the last confident detection; zero before any.
    pub fn pending_offset(&self) -> PoseOffset {
        self.offset
    }

    /// `(timestep, node_id)` of the last confident detection.
    pub fn last_confident(&self) -> Option<(usize, usize)> {
        self.last_confident
    }

    /// Maps an integrated (uncorrected) pose into the corrected frame.
    ///
    /// The correction is the rigid motion that took the anchoring raw pose
    /// onto its node, so later raw motion is replayed from the node pose.
    /// For a pure translation offset this is a plain shift.
    pub fn apply(&self, raw: &Pose2) -> Pose2 {
        match &self.anchor {
            None => *raw,
            Some(a) => a.node.compose(&relative_between(&a.raw, raw)),
        }
    }
}

fn detection_accepted(
    predicted: &Pose2,
    node: &Pose2,
    detection: &NodeDetection,
    cfg: &FusionConfig,
) -> bool {
    detection.confidence() > cfg.delta
        && predicted.planar_distance(node) <= cfg.gate_radius
        && angular_error(predicted.theta(), node.theta()) <= cfg.gate_heading
}

/// Forward drift correction for one detection.
///
/// `raw` is the integrated pose at `detection.timestep` before any
/// correction. When the detection is confident (and within the gate) the
/// returned pose is the node pose itself, and the state records the new
/// correction; otherwise the current correction is applied to `raw` and the
/// state is returned unchanged.
pub fn forward_correct(
    state: &CorrectionState,
    raw: &Pose2,
    detection: &NodeDetection,
    map: &TopoMap,
    cfg: &FusionConfig,
) -> Result<(Pose2, CorrectionState)> {
    let node = map.lookup(detection.node_id)?;
    let predicted = state.apply(raw);
    if !detection_accepted(&predicted, &node, detection, cfg) {
        return Ok((predicted, *state));
    }
    let next = CorrectionState {
        offset: PoseOffset {
            dx: node.x() - raw.x(),
            dy: node.y() - raw.y(),
            dtheta: angle_diff(node.theta(), raw.theta()),
        },
        anchor: Some(Anchor { raw: *raw, node }),
        last_confident: Some((detection.timestep, detection.node_id)),
    };
    Ok((node, next))
}

fn backward_in_place(
    poses: &mut [Pose2],
    t: usize,
    floor: usize,
    node: &Pose2,
    cfg: &FusionConfig,
) {
    let at = poses[t];
    let rx = node.x() - at.x();
    let ry = node.y() - at.y();
    let rtheta = angle_diff(node.theta(), at.theta());
    let first = t.saturating_sub(cfg.t_w).max(floor);
    for (tau, pose) in poses.iter_mut().enumerate().take(t).skip(first) {
        let k = (t - tau) as f64;
        let ftr = libm::exp(-cfg.lambda_tr * k);
        let ftheta = libm::exp(-cfg.lambda_theta * k);
        *pose = Pose2::new(
            pose.x() + ftr * rx,
            pose.y() + ftr * ry,
            pose.theta() + ftheta * rtheta,
        );
    }
}

/// Backward path correction triggered by a confident detection at `t`.
///
/// The residual `node_pose − trajectory[t]` is added to each pose `τ` in
/// `[t − t_w, t − 1]`, scaled by `exp(−λ_tr (t − τ))` for translation and
/// `exp(−λ_θ (t − τ))` for heading. Pose `t` and everything outside the
/// window are left alone.
pub fn backward_correct(
    trajectory: &Trajectory,
    t: usize,
    node_pose: &Pose2,
    cfg: &FusionConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if t >= trajectory.len() {
        return Err(Error::TimestepOutOfRange {
            timestep: t,
            len: trajectory.len(),
        });
    }
    let mut out = trajectory.clone();
    backward_in_place(out.poses_mut(), t, 0, node_pose, cfg);
    Ok(out)
}

/// Local quadratic regression of x and y against the timestep. Headings
/// are copied through bit for bit.
pub fn smooth(trajectory: &Trajectory, cfg: &FusionConfig) -> Result<Trajectory> {
    let xs: Vec<f64> = trajectory.poses().iter().map(Pose2::x).collect();
    let ys: Vec<f64> = trajectory.poses().iter().map(Pose2::y).collect();
    let sx = loess::smooth_series(&xs, cfg.bandwidth)?;
    let sy = loess::smooth_series(&ys, cfg.bandwidth)?;
    let poses = trajectory
        .poses()
        .iter()
        .zip(sx.into_iter().zip(sy))
        .map(|(p, (x, y))| Pose2::new(x, y, p.theta()))
        .collect();
    Trajectory::new(poses)
}

/// `(1 − w)·corrected + w·smoothed` on translation with `w = λ_s / (1 + λ_s)`;
/// headings come from `corrected`.
pub fn blend_smoothed(
    corrected: &Trajectory,
    smoothed: &Trajectory,
    lambda_s: f64,
) -> Result<Trajectory> {
    if corrected.len() != smoothed.len() {
        return Err(Error::LengthMismatch {
            estimate: corrected.len(),
            truth: smoothed.len(),
        });
    }
    let w = lambda_s / (1.0 + lambda_s);
    let poses = corrected
        .poses()
        .iter()
        .zip(smoothed.poses())
        .map(|(c, s)| {
            Pose2::new(
                (1.0 - w) * c.x() + w * s.x(),
                (1.0 - w) * c.y() + w * s.y(),
                c.theta(),
            )
        })
        .collect();
    Trajectory::new(poses)
}

fn check_detections(detections: &[NodeDetection], len: usize) -> Result<()> {
    let mut prev: Option<usize> = None;
    for d in detections {
        if d.timestep >= len {
            return Err(Error::TimestepOutOfRange {
                timestep: d.timestep,
                len,
            });
        }
        if prev.is_some_and(|p| d.timestep <= p) {
            return Err(Error::UnorderedDetections(d.timestep));
        }
        prev = Some(d.timestep);
    }
    Ok(())
}

/// Online forward + backward pass, without the final smoothing. Backward
/// corrections never reach back to or past the previous accepted detection.
pub fn correct_online(
    motions: &[RelativeMotion],
    detections: &[NodeDetection],
    map: &TopoMap,
    origin: Pose2,
    cfg: &FusionConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let len = motions.len() + 1;
    check_detections(detections, len)?;

    let mut poses = Vec::with_capacity(len);
    let mut state = CorrectionState::default();
    let mut raw = origin;
    let mut pending = detections.iter().peekable();

    for t in 0..len {
        if t > 0 {
            raw = raw.compose(&motions[t - 1]);
        }
        let Some(det) = pending.next_if(|d| d.timestep == t) else {
            poses.push(state.apply(&raw));
            continue;
        };
        let predicted = state.apply(&raw);
        let (pose, next) = forward_correct(&state, &raw, det, map, cfg)?;
        poses.push(predicted);
        if next.last_confident != state.last_confident {
            let floor = state.last_confident.map_or(0, |(prev, _)| prev + 1);
            backward_in_place(&mut poses, t, floor, &pose, cfg);
            poses[t] = pose;
        }
        state = next;
    }
    Trajectory::new(poses)
}

/// Full topometric pipeline: integrate `motions` from `origin`, correct with
/// `detections` (sorted, at most one per timestep), then smooth and blend.
/// The output has `motions.len() + 1` poses.
pub fn fuse(
    motions: &[RelativeMotion],
    detections: &[NodeDetection],
    map: &TopoMap,
    origin: Pose2,
    cfg: &FusionConfig,
) -> Result<Trajectory> {
    let corrected = correct_online(motions, detections, map, origin, cfg)?;
    let smoothed = smooth(&corrected, cfg)?;
    blend_smoothed(&corrected, &smoothed, cfg.lambda_s)
}
