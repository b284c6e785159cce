//! Flat `key = value` configuration files for the fusion tunables and for
//! whole experiments.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use topometric_core::metrics::DEFAULT_SUB_LENGTHS;
use topometric_core::simulator::{OdometryNoiseModel, PathKind, ScenarioParams};
use topometric_core::FusionConfig;

use crate::error::{Error, Result};
use crate::format::read_text;

/// `(line, key, value)` triples in file order. Blank lines and lines
/// starting with `#` are skipped; a key may appear once.
pub fn parse_pairs(path: &Path, text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let Some((k, v)) = l.split_once('=') else {
            return Err(config_err(path, line, "expected key = value"));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(config_err(path, line, "empty key"));
        }
        if !seen.insert(k.to_string()) {
            return Err(config_err(path, line, &format!("duplicate key {k:?}")));
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn config_err(path: &Path, line: usize, msg: &str) -> Error {
    Error::Config(format!("{}:{line}: {msg}", path.display()))
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn float(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if v.is_nan() {
        return Err(Error::Config(format!("{key}: NaN")));
    }
    Ok(v)
}

fn set_fusion(cfg: &mut FusionConfig, key: &str, value: &str) -> Result<()> {
    cfg.set(key, float(key, value)?)
        .map_err(|e| Error::Config(format!("{key}: {e}")))
}

/// Reads a fusion config; absent keys keep their defaults.
pub fn parse_fusion_config(path: &Path, text: &str) -> Result<FusionConfig> {
    let mut cfg = FusionConfig::default();
    for (line, k, v) in parse_pairs(path, text)? {
        if !FusionConfig::KEYS.contains(&k.as_str()) {
            return Err(config_err(path, line, &format!("unknown key {k:?}")));
        }
        set_fusion(&mut cfg, &k, &v).map_err(|e| config_err(path, line, &e.to_string()))?;
    }
    Ok(cfg)
}

pub fn load_fusion_config(path: &Path) -> Result<FusionConfig> {
    parse_fusion_config(path, &read_text(path)?)
}

/// Where an experiment's scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Generate(ScenarioParams),
    Bundle(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: ScenarioSource,
    pub fusion: FusionConfig,
    pub sub_lengths: Vec<f64>,
}

/// Scenario keys understood in a spec file, besides the fusion keys.
pub const SCENARIO_KEYS: [&str; 14] = [
    "kind",
    "length",
    "step",
    "seed",
    "d_th",
    "noise",
    "trans_bias",
    "trans_sigma",
    "rot_bias",
    "rot_sigma",
    "detect_radius",
    "true_confidence_mean",
    "false_rate",
    "confidence_sigma",
];

fn noise_preset(name: &str, seed: u64) -> Result<OdometryNoiseModel> {
    match name {
        "short" => Ok(OdometryNoiseModel::short_sequence(seed)),
        "long" => Ok(OdometryNoiseModel::long_sequence(seed)),
        "none" => Ok(OdometryNoiseModel::noiseless(seed)),
        _ => Err(Error::Config(format!(
            "noise: unknown preset {name:?} (short, long, none)"
        ))),
    }
}

impl ExperimentSpec {
    /// Default loop scenario with default fusion settings.
    pub fn generated(params: ScenarioParams) -> Self {
        ExperimentSpec {
            source: ScenarioSource::Generate(params),
            fusion: FusionConfig::default(),
            sub_lengths: DEFAULT_SUB_LENGTHS.to_vec(),
        }
    }

    /// Parses a spec file. `fusion_config` paths are relative to the spec
    /// file's directory; fusion keys written in the spec override the ones
    /// loaded from that file.
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let pairs = parse_pairs(path, text)?;
        let has = |key: &str| pairs.iter().any(|(_, k, _)| k == key);
        let bundle = pairs.iter().find(|(_, k, _)| k == "bundle");
        let base = path.parent().unwrap_or(Path::new(""));

        if let Some((line, _, _)) = bundle {
            if let Some((_, k, _)) = pairs
                .iter()
                .find(|(_, k, _)| SCENARIO_KEYS.contains(&k.as_str()))
            {
                return Err(config_err(
                    path,
                    *line,
                    &format!("bundle and generator key {k:?} are mutually exclusive"),
                ));
            }
        } else if !has("kind") || !has("length") {
            return Err(Error::Config(format!(
                "{}: need either `bundle` or `kind` and `length`",
                path.display()
            )));
        }

        let mut spec = match bundle {
            Some((_, _, v)) => ExperimentSpec {
                source: ScenarioSource::Bundle(base.join(v)),
                fusion: FusionConfig::default(),
                sub_lengths: DEFAULT_SUB_LENGTHS.to_vec(),
            },
            None => ExperimentSpec::generated(ScenarioParams::new(PathKind::Loop, 1.0, 0)),
        };

        if let Some((line, _, v)) = pairs.iter().find(|(_, k, _)| k == "fusion_config") {
            spec.fusion = load_fusion_config(&base.join(v)).map_err(|e| match e {
                Error::Config(m) => config_err(path, *line, &m),
                other => other,
            })?;
        }
        // seed and noise presets first so later noise fields refine them
        let rank = |k: &str| match k {
            "seed" => 0,
            "noise" => 1,
            _ => 2,
        };
        let mut ordered: Vec<_> = pairs
            .iter()
            .filter(|(_, k, _)| k != "bundle" && k != "fusion_config")
            .collect();
        ordered.sort_by_key(|(line, k, _)| (rank(k), *line));
        for (line, k, v) in ordered {
            spec.set(k, v).map_err(|e| match e {
                Error::Config(m) => config_err(path, *line, &m),
                other => other,
            })?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_text(path)?)
    }

    /// Whether `key` names a parameter that [`ExperimentSpec::set`] accepts.
    pub fn is_known_key(key: &str) -> bool {
        key == "sub_lengths" || FusionConfig::KEYS.contains(&key) || SCENARIO_KEYS.contains(&key)
    }

    /// Sets one parameter by name. Changing `seed` reseeds the path, noise
    /// and detector streams together.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if FusionConfig::KEYS.contains(&key) {
            return set_fusion(&mut self.fusion, key, value);
        }
        if key == "sub_lengths" {
            self.sub_lengths = value
                .split(',')
                .map(|s| float(key, s.trim()))
                .collect::<Result<_>>()?;
            return Ok(());
        }
        if !SCENARIO_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        let ScenarioSource::Generate(p) = &mut self.source else {
            return Err(Error::Config(format!(
                "{key}: not applicable to a bundle scenario"
            )));
        };
        match key {
            "kind" => {
                p.kind = value
                    .parse()
                    .map_err(|_| Error::Config(format!("kind: unknown path kind {value:?}")))?
            }
            "length" => p.length = float(key, value)?,
            "step" => p.step = float(key, value)?,
            "seed" => {
                let seed: u64 = number(key, value)?;
                p.seed = seed;
                p.noise.seed = seed;
                p.detector.seed = seed;
            }
            "d_th" => p.d_th = float(key, value)?,
            "noise" => p.noise = noise_preset(value, p.seed)?,
            "trans_bias" => p.noise.trans_bias = float(key, value)?,
            "trans_sigma" => p.noise.trans_sigma = float(key, value)?,
            "rot_bias" => p.noise.rot_bias = float(key, value)?,
            "rot_sigma" => p.noise.rot_sigma = float(key, value)?,
            "detect_radius" => p.detector.detect_radius = float(key, value)?,
            "true_confidence_mean" => p.detector.true_confidence_mean = float(key, value)?,
            "false_rate" => p.detector.false_rate = float(key, value)?,
            "confidence_sigma" => p.detector.confidence_sigma = float(key, value)?,
            _ => unreachable!("key list and match arms agree"),
        }
        Ok(())
    }

    /// Parameter checks that do not need the scenario to be generated.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: topometric_core::Error| Error::Config(e.to_string());
        self.fusion.validate().map_err(cfg)?;
        if self.sub_lengths.is_empty() {
            return Err(Error::Config("sub_lengths: empty".into()));
        }
        if self
            .sub_lengths
            .iter()
            .any(|l| !(l.is_finite() && *l > 0.0))
        {
            return Err(Error::Config("sub_lengths: must be finite and > 0".into()));
        }
        if let ScenarioSource::Generate(p) = &self.source {
            p.noise.validate().map_err(cfg)?;
            p.detector.validate().map_err(cfg)?;
            for (name, v) in [("length", p.length), ("step", p.step), ("d_th", p.d_th)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!("{name}: must be finite and > 0")));
                }
            }
        }
        Ok(())
    }
}

/// Default parameters for `gen`: the short-sequence noise preset and the
/// standard detector.
pub fn default_params(kind: PathKind, length: f64, step: f64, seed: u64) -> ScenarioParams {
    ScenarioParams {
        step,
        ..ScenarioParams::new(kind, length, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("spec.cfg")
    }

    #[test]
    fn fusion_defaults_and_overrides() {
        let cfg = parse_fusion_config(p(), "").unwrap();
        assert_eq!(cfg, FusionConfig::default());
        let cfg = parse_fusion_config(p(), "# c\ndelta = 0.8\nt_w=4\n").unwrap();
        assert_eq!(cfg.delta(), 0.8);
        assert_eq!(cfg.t_w(), 4);
        assert_eq!(cfg.lambda_s(), 1.0);
    }

    #[test]
    fn fusion_rejects_bad_input() {
        for text in [
            "delta = 2",
            "t_w = 1.5",
            "colour = red",
            "delta",
            "delta = 0.9\ndelta = 0.8",
            "delta = x",
        ] {
            let e = parse_fusion_config(p(), text).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{text}: {e}");
        }
    }

    #[test]
    fn generated_spec() {
        let s = ExperimentSpec::parse(
            p(),
            "kind = loop\nlength = 120\nfalse_rate = 0.2\ntrans_bias = 0.03\nnoise = long\nseed = 9\ndelta = 0.8\nsub_lengths = 10, 20\n",
        )
        .unwrap();
        let ScenarioSource::Generate(params) = s.source else {
            panic!()
        };
        assert_eq!(params.length, 120.0);
        assert_eq!(params.seed, 9);
        assert_eq!(params.noise.seed, 9);
        assert_eq!(params.detector.seed, 9);
        // the preset is applied before the explicit field
        assert_eq!(params.noise.trans_bias, 0.03);
        assert_eq!(
            params.noise.rot_sigma,
            OdometryNoiseModel::long_sequence(0).rot_sigma
        );
        assert_eq!(params.detector.false_rate, 0.2);
        assert_eq!(s.fusion.delta(), 0.8);
        assert_eq!(s.sub_lengths, [10.0, 20.0]);
    }

    #[test]
    fn spec_source_is_exclusive() {
        assert!(ExperimentSpec::parse(p(), "length = 10\n").is_err());
        assert!(ExperimentSpec::parse(p(), "bundle = b\nkind = loop\n").is_err());
        let s = ExperimentSpec::parse(Path::new("dir/spec.cfg"), "bundle = b\n").unwrap();
        assert_eq!(s.source, ScenarioSource::Bundle(PathBuf::from("dir/b")));
    }

    #[test]
    fn spec_rejects_invalid_values() {
        for text in [
            "kind = spiral\nlength = 10",
            "kind = loop\nlength = -1",
            "kind = loop\nlength = 10\nfalse_rate = 2",
            "kind = loop\nlength = 10\nsub_lengths =",
            "kind = loop\nlength = 10\nnoise = loud",
            "kind = loop\nlength = 10\nwhat = 1",
        ] {
            assert!(
                matches!(ExperimentSpec::parse(p(), text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn fusion_file_then_inline() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("f.cfg"), "delta = 0.7\nt_w = 3\n").unwrap();
        let spec_path = dir.path().join("spec.cfg");
        let s = ExperimentSpec::parse(
            &spec_path,
            "kind = loop\nlength = 50\nfusion_config = f.cfg\nt_w = 5\n",
        )
        .unwrap();
        assert_eq!(s.fusion.delta(), 0.7);
        assert_eq!(s.fusion.t_w(), 5);
        let e = ExperimentSpec::parse(
            &spec_path,
            "kind = loop\nlength = 50\nfusion_config = missing.cfg\n",
        )
        .unwrap_err();
        assert!(matches!(e, Error::Io { .. }));
    }

    #[test]
    fn known_keys() {
        assert!(ExperimentSpec::is_known_key("delta"));
        assert!(ExperimentSpec::is_known_key("false_rate"));
        assert!(ExperimentSpec::is_known_key("seed"));
        assert!(!ExperimentSpec::is_known_key("bundle"));
        assert!(!ExperimentSpec::is_known_key("nope"));
    }
}
