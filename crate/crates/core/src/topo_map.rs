//! Topological key-frame map: globally referenced nodes at least `d_th`
//! apart, resolvable from node id back to a metric pose.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Pose2;
use crate::odometry::Trajectory;

/// Default minimum spacing between key-frame nodes, in meters.
pub const DEFAULT_NODE_SPACING: f64 = 1.0;

/// Relative slack on the spacing test so that poses laid out exactly `d_th`
/// apart are not lost to rounding.
pub const SPACING_RTOL: f64 = 1e-9;

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct TopoNode {
    pub id: usize,
    pub pose: Pose2,
    /// Appearance descriptor of the key-frame, if a front-end supplies one.
    pub descriptor: Option<Vec<f64>>,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct TopoMap {
    nodes: Vec<TopoNode>,
    d_th: f64,
}

fn check_spacing(d_th: f64) -> Result<()> {
    if !(d_th.is_finite() && d_th > 0.0) {
        return Err(Error::InvalidParameter {
            name: "d_th",
            reason: "must be finite and > 0",
        });
    }
    Ok(())
}

#[inline]
fn far_enough(a: &Pose2, b: &Pose2, d_th: f64) -> bool {
    a.planar_distance(b) >= d_th * (1.0 - SPACING_RTOL)
}

impl TopoMap {
    /// Greedy key-frame selection along `reference`: the first pose is node 0
    /// and every later pose becomes a node iff it is at least `d_th` from all
    /// nodes selected so far.
    pub fn build(reference: &Trajectory, d_th: f64) -> Result<Self> {
        check_spacing(d_th)?;
        let mut nodes: Vec<TopoNode> = Vec::new();
        for pose in reference.poses() {
            if nodes.iter().all(|n| far_enough(&n.pose, pose, d_th)) {
                nodes.push(TopoNode {
                    id: nodes.len(),
                    pose: *pose,
                    descriptor: None,
                });
            }
        }
        Ok(TopoMap { nodes, d_th })
    }

    /// Rebuilds a map from stored node poses. Ids are assigned in order, and
    /// the spacing invariant is checked.
    pub fn from_poses(poses: &[Pose2], d_th: f64) -> Result<Self> {
        check_spacing(d_th)?;
        if poses.is_empty() {
            return Err(Error::EmptyMap);
        }
        for (i, a) in poses.iter().enumerate() {
            if poses[..i].iter().any(|b| !far_enough(a, b, d_th)) {
                return Err(Error::InvalidParameter {
                    name: "nodes",
                    reason: "two nodes are closer than d_th",
                });
            }
        }
        let nodes = poses
            .iter()
            .enumerate()
            .map(|(id, pose)| TopoNode {
                id,
                pose: *pose,
                descriptor: None,
            })
            .collect();
        Ok(TopoMap { nodes, d_th })
    }

    pub fn d_th(&self) -> f64 {
        self.d_th
    }

    pub fn nodes(&self) -> &[TopoNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node id → pose.
    pub fn lookup(&self, node_id: usize) -> Result<Pose2> {
        self.nodes
            .get(node_id)
            .map(|n| n.pose)
            .ok_or(Error::UnknownNode(node_id))
    }

    /// Closest node in the plane; ties go to the lowest id.
    pub fn nearest_node(&self, pose: &Pose2) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for n in &self.nodes {
            let d = n.pose.planar_distance(pose);
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((n.id, d)),
            }
        }
        best.ok_or(Error::EmptyMap)
    }

    /// Attaches one descriptor per node. All descriptors must share a length.
    pub fn attach_descriptors(&mut self, descriptors: Vec<Vec<f64>>) -> Result<()> {
        if descriptors.len() != self.nodes.len() {
            return Err(Error::InvalidParameter {
                name: "descriptors",
                reason: "need exactly one descriptor per node",
            });
        }
        if let Some(first) = descriptors.first() {
            if descriptors.iter().any(|d| d.len() != first.len()) {
                return Err(Error::InvalidParameter {
                    name: "descriptors",
                    reason: "descriptors must share one length",
                });
            }
        }
        for (node, d) in self.nodes.iter_mut().zip(descriptors) {
            node.descriptor = Some(d);
        }
        Ok(())
    }
}

/// A topological place match: node `node_id` seen at `timestep` with the
/// classifier's confidence.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeDetection {
    pub timestep: usize,
    pub node_id: usize,
    confidence: f64,
}

impl NodeDetection {
    pub fn new(timestep: usize, node_id: usize, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidParameter {
                name: "confidence",
                reason: "must lie in [0, 1]",
            });
        }
        Ok(NodeDetection {
            timestep,
            node_id,
            confidence,
        })
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}
