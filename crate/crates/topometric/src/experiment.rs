//! End-to-end experiments: load or generate a scenario, run the
//! integration-only and topometric pipelines, and write the artifacts.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use topometric_core::{
    evaluate, fuse, integrate, ErrorReport, Scenario, ScenarioParams, Trajectory,
};

use crate::config::{ExperimentSpec, ScenarioSource};
use crate::error::{Error, Result};
use crate::format::{self, read_bundle, save_trajectory, write_bundle, write_text};
use crate::report::{report_csv, report_json, Improvement};

/// Subdirectory of an experiment output holding the scenario bundle.
pub const BUNDLE_DIR: &str = "scenario";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub metric: Trajectory,
    pub topometric: Trajectory,
    pub metric_report: ErrorReport,
    pub topometric_report: ErrorReport,
    pub improvement: Improvement,
}

pub fn load_scenario(source: &ScenarioSource) -> Result<Scenario> {
    match source {
        ScenarioSource::Generate(p) => Ok(Scenario::generate(p)?),
        ScenarioSource::Bundle(dir) => read_bundle(dir),
    }
}

/// Runs both pipelines on `scenario` without touching the disk.
pub fn evaluate_scenario(scenario: &Scenario, spec: &ExperimentSpec) -> Result<Outcome> {
    let truth = &scenario.ground_truth;
    let metric = integrate(scenario.origin(), &scenario.motions);
    let topometric = fuse(
        &scenario.motions,
        &scenario.detections,
        &scenario.map,
        scenario.origin(),
        &spec.fusion,
    )?;
    let metric_report = evaluate(&metric, truth, &spec.sub_lengths)?;
    let topometric_report = evaluate(&topometric, truth, &spec.sub_lengths)?;
    let improvement = Improvement::new(&metric_report, &topometric_report);
    Ok(Outcome {
        metric,
        topometric,
        metric_report,
        topometric_report,
        improvement,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs one experiment and writes its artifacts into `out`.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    spec.validate()?;
    let scenario = load_scenario(&spec.source)?;
    let outcome = evaluate_scenario(&scenario, spec)?;

    create_dir(out)?;
    save_trajectory(&out.join(format::TRUTH_FILE), &scenario.ground_truth)?;
    save_trajectory(&out.join("estimate_metric.txt"), &outcome.metric)?;
    save_trajectory(&out.join("estimate_topometric.txt"), &outcome.topometric)?;
    for (name, report) in [
        ("metric", &outcome.metric_report),
        ("topometric", &outcome.topometric_report),
    ] {
        write_text(
            &out.join(format!("report_{name}.csv")),
            &report_csv(report)?,
        )?;
        write_text(
            &out.join(format!("report_{name}.json")),
            &report_json(report)?,
        )?;
    }
    write_text(
        &out.join("improvement.json"),
        &outcome.improvement.to_json()?,
    )?;
    write_bundle(&out.join(BUNDLE_DIR), &scenario)?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub trans_pct: f64,
    pub rot_deg_per_m: f64,
    pub metric_trans_pct: f64,
    pub metric_rot_deg_per_m: f64,
}

/// One experiment per value of `param`, each in its own `param=value`
/// subdirectory of `out`, summarized in `sweep.csv`. Rows follow the order
/// of `values`.
pub fn sweep(
    spec: &ExperimentSpec,
    param: &str,
    values: &[String],
    out: &Path,
) -> Result<Vec<SweepRow>> {
    if !ExperimentSpec::is_known_key(param) {
        return Err(Error::Config(format!("sweep: unknown parameter {param:?}")));
    }
    if values.is_empty() {
        return Err(Error::Config("sweep: no values given".into()));
    }
    let points = values
        .iter()
        .map(|v| {
            let mut s = spec.clone();
            s.set(param, v)?;
            s.validate()?;
            Ok((v.clone(), s))
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(out)?;

    let rows = points
        .par_iter()
        .map(|(v, s)| {
            let o = run_experiment(s, &out.join(format!("{param}={v}")))?;
            Ok(SweepRow {
                value: v.clone(),
                trans_pct: o.topometric_report.avg_translation_pct,
                rot_deg_per_m: o.topometric_report.avg_rotation_deg_per_m,
                metric_trans_pct: o.metric_report.avg_translation_pct,
                metric_rot_deg_per_m: o.metric_report.avg_rotation_deg_per_m,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().expect("in-memory csv flush");
    write_text(
        &out.join(SWEEP_FILE),
        &String::from_utf8(bytes).expect("csv output is utf-8"),
    )?;
    Ok(rows)
}

/// Generates a scenario and writes it as a bundle.
pub fn generate(params: &ScenarioParams, out: &Path) -> Result<Scenario> {
    let scenario = Scenario::generate(params)?;
    write_bundle(out, &scenario)?;
    Ok(scenario)
}
