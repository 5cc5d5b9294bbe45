//! Aggregation and the CSV/JSON artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cgda_core::iet::RunReport;
use cgda_core::scalar::serde_float;
use cgda_core::OptimizerKind;
use serde::{Deserialize, Serialize};

use crate::batch::Cell;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub seed: u64,
    pub repetitions: usize,
    pub goal_count: usize,
    pub configurations: Vec<ConfigurationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationReport {
    pub label: String,
    pub method: OptimizerKind,
    #[serde(with = "serde_float")]
    pub dilatation: f64,
    #[serde(with = "serde_float")]
    pub max_velocity: f64,
    pub mean_evaluations: f64,
    pub median_evaluations: f64,
    /// Over valid runs only; absent when every run was invalid.
    pub mean_discrepancy: Option<f64>,
    pub invalid_count: usize,
    pub valid_count: usize,
    /// Paint only, over valid runs.
    pub mean_painted_percent: Option<f64>,
    /// Mean cumulative true evaluations after each goal, over all runs.
    pub mean_cumulative_evaluations: Vec<f64>,
    pub runs: Vec<RunReport<f64>>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

impl ConfigurationReport {
    pub fn aggregate(cell: &Cell, runs: Vec<RunReport<f64>>) -> Self {
        let evals: Vec<f64> = runs.iter().map(|r| r.true_evaluations() as f64).collect();
        let valid: Vec<&RunReport<f64>> = runs.iter().filter(|r| !r.invalid).collect();
        let discrepancies: Vec<f64> = valid.iter().map(|r| r.total_discrepancy).collect();
        let painted: Vec<f64> = valid.iter().filter_map(|r| r.painted_percent).collect();
        let goals = runs.iter().map(|r| r.cumulative_evaluations.len()).max().unwrap_or(0);
        let mean_cumulative_evaluations = (0..goals)
            .map(|j| {
                let col: Vec<f64> = runs.iter().filter_map(|r| r.cumulative_evaluations.get(j)).map(|&v| v as f64).collect();
                mean(&col).unwrap_or(0.0)
            })
            .collect();
        Self {
            label: cell.label(),
            method: cell.method,
            dilatation: cell.dilatation,
            max_velocity: cell.max_velocity,
            mean_evaluations: mean(&evals).unwrap_or(f64::NAN),
            median_evaluations: median(&evals),
            mean_discrepancy: mean(&discrepancies),
            invalid_count: runs.len() - valid.len(),
            valid_count: valid.len(),
            mean_painted_percent: mean(&painted),
            mean_cumulative_evaluations,
            runs,
        }
    }
}

/// Decimal rendering with `inf`, `-inf` and `nan` for non-finite values.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub const SUMMARY_HEADER: &str = "method,dilatation,max_velocity,mean_evaluations,mean_discrepancy,invalid_count,mean_painted_percent";
pub const CUMULATIVE_HEADER: &str = "configuration,goal_index,mean_cumulative_evaluations";

pub fn summary_csv(report: &AggregateReport) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for c in &report.configurations {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.method,
            fmt_float(c.dilatation),
            fmt_float(c.max_velocity),
            fmt_float(c.mean_evaluations),
            fmt_opt(c.mean_discrepancy),
            c.invalid_count,
            fmt_opt(c.mean_painted_percent)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn cumulative_csv(report: &AggregateReport) -> String {
    let mut out = format!("{CUMULATIVE_HEADER}\n");
    for c in &report.configurations {
        for (j, v) in c.mean_cumulative_evaluations.iter().enumerate() {
            writeln!(out, "{},{},{}", c.label, j, fmt_float(*v)).expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn report_json(report: &AggregateReport) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report_json(text: &str) -> Result<AggregateReport, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::Runtime(e.to_string()))
}

/// Writes `summary.csv`, `cumulative.csv` and `report.json` into `out_dir`,
/// creating it if needed.
pub fn emit_reports(report: &AggregateReport, out_dir: impl AsRef<Path>) -> Result<(), HarnessError> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.csv"), summary_csv(report))?;
    fs::write(dir.join("cumulative.csv"), cumulative_csv(report))?;
    fs::write(dir.join("report.json"), report_json(report)?)?;
    Ok(())
}
