//! Plain-text record formats. One record per line, fields separated by
//! whitespace, `#` starts a comment line. Floats are written with `{}`,
//! which prints the shortest string that parses back to the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use topometric_core::topo_map::DEFAULT_NODE_SPACING;
use topometric_core::{NodeDetection, Pose2, RelativeMotion, Scenario, TopoMap, Trajectory};

use crate::error::{Error, Result};

pub const TRUTH_FILE: &str = "truth.txt";
pub const MAP_FILE: &str = "map.txt";
pub const MOTIONS_FILE: &str = "motions.txt";
pub const DETECTIONS_FILE: &str = "detections.txt";

/// Header comment carrying the map's node spacing.
const D_TH_KEY: &str = "d_th";

struct Records<'a> {
    path: &'a Path,
    text: &'a str,
}

impl<'a> Records<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Records { path, text }
    }

    /// Non-comment lines split into exactly `arity` fields, with 1-based
    /// line numbers.
    fn rows(&self, arity: usize) -> impl Iterator<Item = Result<(usize, Vec<&'a str>)>> + '_ {
        self.text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(move |(line, l)| {
                let fields: Vec<&str> = l.split_whitespace().collect();
                if fields.len() != arity {
                    return Err(self.err(
                        line,
                        format!("expected {arity} fields, found {}", fields.len()),
                    ));
                }
                Ok((line, fields))
            })
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::parse(self.path, line, message)
    }

    fn field<T: FromStr>(&self, line: usize, raw: &str, what: &str) -> Result<T> {
        raw.parse()
            .map_err(|_| self.err(line, format!("bad {what} {raw:?}")))
    }

    fn float(&self, line: usize, raw: &str, what: &str) -> Result<f64> {
        let v: f64 = self.field(line, raw, what)?;
        if !v.is_finite() {
            return Err(self.err(line, format!("{what} is not finite")));
        }
        Ok(v)
    }

    /// Checks that the leading index column counts 0, 1, 2, ...
    fn dense(&self, line: usize, raw: &str, expected: usize) -> Result<()> {
        let t: usize = self.field(line, raw, "index")?;
        if t != expected {
            return Err(self.err(
                line,
                format!("index {t} out of sequence, expected {expected}"),
            ));
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn format_trajectory(traj: &Trajectory) -> String {
    let mut out = String::from("# t x y theta\n");
    for (t, p) in traj.iter() {
        writeln!(out, "{t} {} {} {}", p.x(), p.y(), p.theta()).unwrap();
    }
    out
}

pub fn parse_trajectory(path: &Path, text: &str) -> Result<Trajectory> {
    let rec = Records::new(path, text);
    let mut poses = Vec::new();
    for row in rec.rows(4) {
        let (line, f) = row?;
        rec.dense(line, f[0], poses.len())?;
        let pose = Pose2::try_new(
            rec.float(line, f[1], "x")?,
            rec.float(line, f[2], "y")?,
            rec.float(line, f[3], "theta")?,
        )
        .map_err(|e| rec.err(line, e.to_string()))?;
        poses.push(pose);
    }
    Trajectory::new(poses).map_err(|_| rec.err(0, "no poses"))
}

pub fn format_map(map: &TopoMap) -> String {
    let mut out = format!("# {D_TH_KEY} = {}\n# id x y theta\n", map.d_th());
    for n in map.nodes() {
        writeln!(
            out,
            "{} {} {} {}",
            n.id,
            n.pose.x(),
            n.pose.y(),
            n.pose.theta()
        )
        .unwrap();
    }
    out
}

fn header_d_th(rec: &Records<'_>) -> Result<Option<f64>> {
    for (i, l) in rec.text.lines().enumerate() {
        let Some(body) = l.trim().strip_prefix('#') else {
            continue;
        };
        if let Some((k, v)) = body.split_once('=') {
            if k.trim() == D_TH_KEY {
                return rec.float(i + 1, v.trim(), D_TH_KEY).map(Some);
            }
        }
    }
    Ok(None)
}

/// Reads a node map. Without a `# d_th = …` header the spacing is taken
/// as the smallest distance between two nodes.
pub fn parse_map(path: &Path, text: &str) -> Result<TopoMap> {
    let rec = Records::new(path, text);
    let mut poses = Vec::new();
    for row in rec.rows(4) {
        let (line, f) = row?;
        rec.dense(line, f[0], poses.len())?;
        let pose = Pose2::try_new(
            rec.float(line, f[1], "x")?,
            rec.float(line, f[2], "y")?,
            rec.float(line, f[3], "theta")?,
        )
        .map_err(|e| rec.err(line, e.to_string()))?;
        poses.push(pose);
    }
    let d_th = match header_d_th(&rec)? {
        Some(d) => d,
        None => min_spacing(&poses).unwrap_or(DEFAULT_NODE_SPACING),
    };
    TopoMap::from_poses(&poses, d_th).map_err(|e| rec.err(0, e.to_string()))
}

fn min_spacing(poses: &[Pose2]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in poses.iter().enumerate() {
        for b in &poses[..i] {
            let d = a.planar_distance(b);
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    }
    best.filter(|d| *d > 0.0)
}

pub fn format_motions(motions: &[RelativeMotion]) -> String {
    let mut out = String::from("# t dx dy s c\n");
    for (t, m) in motions.iter().enumerate() {
        writeln!(
            out,
            "{t} {} {} {} {}",
            m.dx(),
            m.dy(),
            m.sin_dtheta(),
            m.cos_dtheta()
        )
        .unwrap();
    }
    out
}

pub fn parse_motions(path: &Path, text: &str) -> Result<Vec<RelativeMotion>> {
    let rec = Records::new(path, text);
    let mut out = Vec::new();
    for row in rec.rows(5) {
        let (line, f) = row?;
        rec.dense(line, f[0], out.len())?;
        let m = RelativeMotion::new(
            rec.float(line, f[1], "dx")?,
            rec.float(line, f[2], "dy")?,
            rec.float(line, f[3], "s")?,
            rec.float(line, f[4], "c")?,
        )
        .map_err(|e| rec.err(line, e.to_string()))?;
        out.push(m);
    }
    Ok(out)
}

pub fn format_detections(detections: &[NodeDetection]) -> String {
    let mut out = String::from("# t node_id confidence\n");
    for d in detections {
        writeln!(out, "{} {} {}", d.timestep, d.node_id, d.confidence()).unwrap();
    }
    out
}

pub fn parse_detections(path: &Path, text: &str) -> Result<Vec<NodeDetection>> {
    let rec = Records::new(path, text);
    let mut out = Vec::new();
    for row in rec.rows(3) {
        let (line, f) = row?;
        let d = NodeDetection::new(
            rec.field(line, f[0], "timestep")?,
            rec.field(line, f[1], "node id")?,
            rec.float(line, f[2], "confidence")?,
        )
        .map_err(|e| rec.err(line, e.to_string()))?;
        out.push(d);
    }
    Ok(out)
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    write_text(path, &format_trajectory(traj))
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    parse_trajectory(path, &read_text(path)?)
}

/// Writes the four bundle files into `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, scenario: &Scenario) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(
        &dir.join(TRUTH_FILE),
        &format_trajectory(&scenario.ground_truth),
    )?;
    write_text(&dir.join(MAP_FILE), &format_map(&scenario.map))?;
    write_text(&dir.join(MOTIONS_FILE), &format_motions(&scenario.motions))?;
    write_text(
        &dir.join(DETECTIONS_FILE),
        &format_detections(&scenario.detections),
    )?;
    Ok(())
}

/// Loads a bundle and checks that its parts fit together.
pub fn read_bundle(dir: &Path) -> Result<Scenario> {
    let file = |name: &str| -> PathBuf { dir.join(name) };
    let truth_path = file(TRUTH_FILE);
    let ground_truth = parse_trajectory(&truth_path, &read_text(&truth_path)?)?;
    let map_path = file(MAP_FILE);
    let map = parse_map(&map_path, &read_text(&map_path)?)?;
    let motions_path = file(MOTIONS_FILE);
    let motions = parse_motions(&motions_path, &read_text(&motions_path)?)?;
    let det_path = file(DETECTIONS_FILE);
    let detections = parse_detections(&det_path, &read_text(&det_path)?)?;

    if motions.len() + 1 != ground_truth.len() {
        return Err(Error::parse(
            motions_path,
            0,
            format!(
                "{} motions for {} truth poses",
                motions.len(),
                ground_truth.len()
            ),
        ));
    }
    for d in &detections {
        if d.node_id >= map.len() {
            return Err(Error::Scenario(topometric_core::Error::UnknownNode(
                d.node_id,
            )));
        }
    }
    Ok(Scenario {
        ground_truth,
        map,
        motions,
        detections,
    })
}
