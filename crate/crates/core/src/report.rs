//! Run reports and their JSON, CSV and Markdown renderings.
//!
//! Every renderer is a pure function of the report, so identical inputs give
//! byte-identical output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::kflann::{SeedPolicy, TuningTrace};

pub const SCHEMA_VERSION: u32 = 1;

/// Columns of the tabular run report.
pub const CSV_COLUMNS: [&str; 8] = [
    "dataset",
    "normalization",
    "tolerance_method",
    "vigilance",
    "clusters",
    "error_rate_percent",
    "epochs",
    "converged",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Md,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Md => "md",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Md),
            other => Err(Error::InvalidParam(format!(
                "unknown report format {other:?} (expected json, csv, md)"
            ))),
        }
    }
}

/// Something that renders as one table row.
pub trait Tabular {
    fn headers() -> Vec<&'static str>;
    fn cells(&self) -> Vec<String>;
}

/// Shortest round-trip representation; empty for `None`.
pub fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv<T: Tabular>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(T::headers())?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParam(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_markdown<T: Tabular>(rows: &[T]) -> String {
    let headers = T::headers();
    let mut out = format!("| {} |\n", headers.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(headers.len())));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.cells().join(" | ")));
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Renders rows in `format`; JSON emits the array of serialized rows.
pub fn render<T: Tabular + Serialize>(rows: &[T], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => to_json(rows),
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Md => Ok(to_markdown(rows)),
    }
}

/// Outcome of one load, normalize, tolerance, tune, fit and evaluate pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub dataset: String,
    pub patterns: usize,
    pub features: usize,
    /// Seed of a generated dataset.
    pub seed: Option<u64>,
    pub normalization: String,
    pub tolerance_method: String,
    pub tuned: bool,
    /// Tolerance used by the final fit, in normalized units.
    pub tolerance: Vec<f64>,
    pub vigilance: f64,
    pub seed_policy: SeedPolicy,
    pub max_epochs: usize,
    pub clusters: usize,
    pub error_rate_percent: Option<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub tuning: Option<TuningTrace>,
    pub evaluation: Option<EvalReport>,
    /// Final centroids in normalized units, in node order.
    pub centroids: Vec<Vec<f64>>,
    /// Node index of every pattern, in dataset order.
    pub assignments: Vec<usize>,
}

impl Tabular for RunReport {
    fn headers() -> Vec<&'static str> {
        CSV_COLUMNS.to_vec()
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.normalization.clone(),
            self.tolerance_method.clone(),
            self.vigilance.to_string(),
            self.clusters.to_string(),
            fmt_opt(self.error_rate_percent),
            self.epochs.to_string(),
            self.converged.to_string(),
        ]
    }
}

impl RunReport {
    /// JSON renders the full report; CSV and Markdown render the summary row.
    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => to_json(self),
            ReportFormat::Csv => to_csv(std::slice::from_ref(self)),
            ReportFormat::Md => Ok(to_markdown(std::slice::from_ref(self))),
        }
    }

    /// `pattern,cluster` rows, with the mapped class when evaluated.
    pub fn assignments_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.evaluation {
            Some(ev) => {
                w.write_record(["pattern", "cluster", "mapped_class"])?;
                for (i, &a) in self.assignments.iter().enumerate() {
                    w.write_record([i.to_string(), a.to_string(), ev.mapping[a].clone()])?;
                }
            }
            None => {
                w.write_record(["pattern", "cluster"])?;
                for (i, &a) in self.assignments.iter().enumerate() {
                    w.write_record([i.to_string(), a.to_string()])?;
                }
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParam(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
