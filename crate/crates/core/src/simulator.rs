//! Synthetic scenarios: ground-truth paths, biased noisy odometry and a
//! confidence-scored topological detector.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a
//! counter-based generator with a fixed, platform-independent output
//! stream. Each consumer seeds it with its own `seed` and draws from a
//! dedicated ChaCha stream, so path, odometry and detector noise never
//! share draws. Transcendental functions go through `libm`, which keeps
//! scenarios bit-identical across platforms.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{relative_between, Pose2, RelativeMotion};
use crate::odometry::Trajectory;
use crate::topo_map::{NodeDetection, TopoMap, DEFAULT_NODE_SPACING};

const PATH_STREAM: u64 = 0;
const ODOMETRY_STREAM: u64 = 1;
const DETECTOR_STREAM: u64 = 2;

/// First positive zero of the Bessel function J0. A heading profile
/// `A·sin(u)` with this amplitude closes into a figure-eight.
const FIGURE_EIGHT_AMPLITUDE: f64 = 2.404_825_557_695_773;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// Closed convex loop, traversed once.
    Loop,
    /// Closed self-crossing figure-eight.
    FigureEight,
    /// Open path with a smoothly wandering turn rate.
    RandomWalk,
}

impl PathKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathKind::Loop => "loop",
            PathKind::FigureEight => "figure-eight",
            PathKind::RandomWalk => "random-walk",
        }
    }
}

impl FromStr for PathKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loop" => Ok(PathKind::Loop),
            "figure-eight" | "figure8" => Ok(PathKind::FigureEight),
            "random-walk" => Ok(PathKind::RandomWalk),
            _ => Err(Error::UnknownPathKind),
        }
    }
}

/// Lays out `headings.len()` segments of length `step` from the origin.
fn polyline(headings: &[f64], step: f64) -> Trajectory {
    let mut poses = Vec::with_capacity(headings.len() + 1);
    let (mut x, mut y) = (0.0, 0.0);
    for &h in headings {
        poses.push(Pose2::new(x, y, h));
        let (s, c) = libm::sincos(h);
        x += step * c;
        y += step * s;
    }
    // the final pose keeps the last heading for open paths; closed paths
    // overwrite it with the starting heading
    let last = headings.last().copied().unwrap_or(0.0);
    poses.push(Pose2::new(x, y, last));
    Trajectory::new(poses).expect("polyline always has a pose")
}

/// Ground-truth path of about `length` meters in steps of `step` meters.
///
/// Closed kinds have `round(length / step)` segments and return to the start
/// (the last pose coincides with the first up to rounding). Headings point
/// along the segment leaving each pose.
pub fn generate_path(kind: PathKind, length: f64, step: f64, seed: u64) -> Result<Trajectory> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: "must be finite and > 0",
        });
    }
    if !(length.is_finite() && length > step) {
        return Err(Error::InvalidParameter {
            name: "length",
            reason: "must be finite and longer than one step",
        });
    }
    let segments = libm::round(length / step) as usize;
    let mut rng = rng_for(seed, PATH_STREAM);
    let phase = |k: usize| TAU * (k as f64 + 0.5) / segments as f64;

    match kind {
        PathKind::Loop | PathKind::FigureEight => {
            if segments < 8 {
                return Err(Error::InvalidParameter {
                    name: "length",
                    reason: "closed paths need at least 8 steps",
                });
            }
            let rotation = uniform(&mut rng, -PI, PI);
            // Only even harmonics perturb the loop heading, which keeps the
            // discrete displacement sum at zero.
            let a = uniform(&mut rng, 0.05, 0.2);
            let c = uniform(&mut rng, 0.0, 0.04);
            let p1 = uniform(&mut rng, 0.0, TAU);
            let p2 = uniform(&mut rng, 0.0, TAU);
            let headings: Vec<f64> = (0..segments)
                .map(|k| {
                    let u = phase(k);
                    match kind {
                        PathKind::Loop => {
                            rotation + u + a * libm::sin(2.0 * u + p1) + c * libm::sin(4.0 * u + p2)
                        }
                        _ => rotation + FIGURE_EIGHT_AMPLITUDE * libm::sin(u),
                    }
                })
                .collect();
            let open = polyline(&headings, step);
            let mut poses = open.into_poses();
            let end = poses.len() - 1;
            poses[end] = poses[end].with_theta(headings[0]);
            Trajectory::new(poses)
        }
        PathKind::RandomWalk => {
            const MAX_TURN_RATE: f64 = 0.1; // rad per meter
            let mut heading = uniform(&mut rng, -PI, PI);
            let mut rate = 0.0;
            let mut headings = Vec::with_capacity(segments);
            for _ in 0..segments {
                headings.push(heading);
                rate =
                    (0.9 * rate + 0.02 * gaussian(&mut rng)).clamp(-MAX_TURN_RATE, MAX_TURN_RATE);
                heading += rate * step;
            }
            Ok(polyline(&headings, step))
        }
    }
}

/// Odometry error model: a systematic scale error and heading drift plus
/// per-step Gaussian noise.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryNoiseModel {
    /// Fractional scale error on every translation.
    pub trans_bias: f64,
    /// Std. dev. of additive noise on each translation component, meters.
    pub trans_sigma: f64,
    /// Heading drift in radians per meter traveled.
    pub rot_bias: f64,
    /// Std. dev. of additive heading noise per step, radians.
    pub rot_sigma: f64,
    pub seed: u64,
}

impl OdometryNoiseModel {
    pub fn noiseless(seed: u64) -> Self {
        OdometryNoiseModel {
            trans_bias: 0.0,
            trans_sigma: 0.0,
            rot_bias: 0.0,
            rot_sigma: 0.0,
            seed,
        }
    }

    /// Lands integration-only error at about 1.5 % on a 262 m loop.
    pub fn short_sequence(seed: u64) -> Self {
        OdometryNoiseModel {
            trans_bias: 0.0202,
            trans_sigma: 0.01,
            rot_bias: 0.0001,
            rot_sigma: 0.001,
            seed,
        }
    }

    /// Lands integration-only error at about 3.8 % on a 446 m loop.
    pub fn long_sequence(seed: u64) -> Self {
        OdometryNoiseModel {
            trans_bias: 0.042,
            trans_sigma: 0.02,
            rot_bias: 0.0002,
            rot_sigma: 0.0015,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.trans_bias,
            self.trans_sigma,
            self.rot_bias,
            self.rot_sigma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("odometry noise model"));
        }
        if self.trans_sigma < 0.0 || self.rot_sigma < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: "must be >= 0",
            });
        }
        if self.trans_bias <= -1.0 {
            return Err(Error::InvalidParameter {
                name: "trans_bias",
                reason: "must be > -1",
            });
        }
        Ok(())
    }
}

/// Perturbs the true body-frame motions of `truth` according to `model`.
pub fn corrupt_odometry(
    truth: &Trajectory,
    model: &OdometryNoiseModel,
) -> Result<Vec<RelativeMotion>> {
    model.validate()?;
    if truth.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: truth.len(),
        });
    }
    let mut rng = rng_for(model.seed, ODOMETRY_STREAM);
    let scale = 1.0 + model.trans_bias;
    truth
        .poses()
        .windows(2)
        .map(|w| {
            let rel = relative_between(&w[0], &w[1]);
            let nx = gaussian(&mut rng);
            let ny = gaussian(&mut rng);
            let nt = gaussian(&mut rng);
            let dx = rel.dx() * scale + model.trans_sigma * nx;
            let dy = rel.dy() * scale + model.trans_sigma * ny;
            let turn = model.rot_bias * rel.distance() + model.rot_sigma * nt;
            // rotate the (sin, cos) pair by `turn`; exact when turn == 0
            let (st, ct) = libm::sincos(turn);
            let s = rel.sin_dtheta() * ct + rel.cos_dtheta() * st;
            let c = rel.cos_dtheta() * ct - rel.sin_dtheta() * st;
            RelativeMotion::new(dx, dy, s, c)
        })
        .collect()
}

/// Place-recognition surrogate.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// A node is reported only while the true pose is strictly closer than this.
    pub detect_radius: f64,
    pub true_confidence_mean: f64,
    /// Probability that a report names a uniformly drawn wrong node.
    pub false_rate: f64,
    pub confidence_sigma: f64,
    pub seed: u64,
}

impl DetectorModel {
    /// Reports every node pass with confidence around 0.95; one report in
    /// ten names a wrong node.
    pub fn standard(seed: u64) -> Self {
        DetectorModel {
            detect_radius: 0.5 * DEFAULT_NODE_SPACING,
            true_confidence_mean: 0.95,
            false_rate: 0.1,
            confidence_sigma: 0.05,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.detect_radius.is_nan() || self.detect_radius < 0.0 {
            return Err(Error::InvalidParameter {
                name: "detect_radius",
                reason: "must be >= 0",
            });
        }
        for (name, p) in [
            ("true_confidence_mean", self.true_confidence_mean),
            ("false_rate", self.false_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        if !(self.confidence_sigma.is_finite() && self.confidence_sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "confidence_sigma",
                reason: "must be finite and >= 0",
            });
        }
        Ok(())
    }
}

/// Simulated detections along `truth`, at most one per timestep.
///
/// Every timestep consumes the same three draws whether or not a detection
/// is emitted, so the stream does not depend on `detect_radius`.
pub fn detect_nodes(
    truth: &Trajectory,
    map: &TopoMap,
    model: &DetectorModel,
) -> Result<Vec<NodeDetection>> {
    model.validate()?;
    if map.is_empty() {
        return Err(Error::EmptyMap);
    }
    let mut rng = rng_for(model.seed, DETECTOR_STREAM);
    let others = map.len() - 1;
    let mut out = Vec::new();
    for (t, pose) in truth.iter() {
        let (nearest, dist) = map.nearest_node(pose)?;
        let branch = rng.random::<f64>();
        let z = gaussian(&mut rng);
        let pick = rng.random::<f64>();
        if dist >= model.detect_radius {
            continue;
        }
        let confidence = (model.true_confidence_mean + model.confidence_sigma * z).clamp(0.0, 1.0);
        let node_id = if others > 0 && branch < model.false_rate {
            let k = ((pick * others as f64) as usize).min(others - 1);
            if k >= nearest {
                k + 1
            } else {
                k
            }
        } else {
            nearest
        };
        out.push(NodeDetection::new(t, node_id, confidence)?);
    }
    Ok(out)
}

/// Everything needed to generate one [`Scenario`].
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub kind: PathKind,
    pub length: f64,
    pub step: f64,
    pub seed: u64,
    pub d_th: f64,
    pub noise: OdometryNoiseModel,
    pub detector: DetectorModel,
}

impl ScenarioParams {
    /// 1 m steps and node spacing, short-sequence odometry noise and the
    /// standard detector, all seeded from `seed`.
    pub fn new(kind: PathKind, length: f64, seed: u64) -> Self {
        ScenarioParams {
            kind,
            length,
            step: 1.0,
            seed,
            d_th: DEFAULT_NODE_SPACING,
            noise: OdometryNoiseModel::short_sequence(seed),
            detector: DetectorModel::standard(seed),
        }
    }

    pub fn with_noise(mut self, noise: OdometryNoiseModel) -> Self {
        self.noise = OdometryNoiseModel {
            seed: self.seed,
            ..noise
        };
        self
    }

    pub fn with_detector(mut self, detector: DetectorModel) -> Self {
        self.detector = DetectorModel {
            seed: self.seed,
            ..detector
        };
        self
    }
}

/// A ground-truth path, its node map, corrupted odometry and detections.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ground_truth: Trajectory,
    pub map: TopoMap,
    pub motions: Vec<RelativeMotion>,
    pub detections: Vec<NodeDetection>,
}

impl Scenario {
    pub fn generate(params: &ScenarioParams) -> Result<Self> {
        let ground_truth = generate_path(params.kind, params.length, params.step, params.seed)?;
        let map = TopoMap::build(&ground_truth, params.d_th)?;
        let motions = corrupt_odometry(&ground_truth, &params.noise)?;
        let detections = detect_nodes(&ground_truth, &map, &params.detector)?;
        Ok(Scenario {
            ground_truth,
            map,
            motions,
            detections,
        })
    }

    pub fn origin(&self) -> Pose2 {
        self.ground_truth.origin()
    }
}
