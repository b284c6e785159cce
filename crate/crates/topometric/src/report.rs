//! CSV and JSON renderings of error reports, and the metric/topometric
//! improvement summary.

use serde::{Serialize, Serializer};
use topometric_core::ErrorReport;

use crate::error::Result;

/// Label of the CSV summary row.
pub const SUMMARY_ROW: &str = "avg";

#[derive(Serialize)]
struct Row<'a> {
    sub_length: &'a str,
    trans_pct: f64,
    rot_deg_per_m: f64,
}

/// One row per evaluated window length, then the `avg` row.
pub fn report_csv(report: &ErrorReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in &report.per_length {
        let label = e.sub_length.to_string();
        w.serialize(Row {
            sub_length: &label,
            trans_pct: e.trans_pct,
            rot_deg_per_m: e.rot_deg_per_m,
        })?;
    }
    w.serialize(Row {
        sub_length: SUMMARY_ROW,
        trans_pct: report.avg_translation_pct,
        rot_deg_per_m: report.avg_rotation_deg_per_m,
    })?;
    let bytes = w.into_inner().expect("in-memory csv flush");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn report_json(report: &ErrorReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// Errors at or below this level (in report units) are rounding noise and
/// count as zero when forming ratios.
pub const NEGLIGIBLE_ERROR: f64 = 1e-9;

/// Quotient `metric / topometric`. A zero denominator is reported as a
/// sentinel string instead of a JSON number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Nonzero metric error over zero topometric error.
    Infinite,
    /// Both errors zero.
    Undefined,
}

impl Ratio {
    pub fn of(metric: f64, topometric: f64) -> Self {
        if topometric > NEGLIGIBLE_ERROR {
            Ratio::Finite(metric / topometric)
        } else if metric > NEGLIGIBLE_ERROR {
            Ratio::Infinite
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(v) => s.serialize_f64(*v),
            Ratio::Infinite => s.serialize_str("inf"),
            Ratio::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub translation: Ratio,
    pub rotation: Ratio,
    pub metric_trans_pct: f64,
    pub metric_rot_deg_per_m: f64,
    pub topometric_trans_pct: f64,
    pub topometric_rot_deg_per_m: f64,
}

impl Improvement {
    pub fn new(metric: &ErrorReport, topometric: &ErrorReport) -> Self {
        Improvement {
            translation: Ratio::of(metric.avg_translation_pct, topometric.avg_translation_pct),
            rotation: Ratio::of(
                metric.avg_rotation_deg_per_m,
                topometric.avg_rotation_deg_per_m,
            ),
            metric_trans_pct: metric.avg_translation_pct,
            metric_rot_deg_per_m: metric.avg_rotation_deg_per_m,
            topometric_trans_pct: topometric.avg_translation_pct,
            topometric_rot_deg_per_m: topometric.avg_rotation_deg_per_m,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
