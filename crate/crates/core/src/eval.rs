//! Scoring clusterings against class labels, and vigilance sweeps.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kflann::{fit, KflannModel, KflannParams, Vigilance};
use crate::tolerance::ToleranceVector;

/// Majority-label scoring of a clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cluster_count: usize,
    pub error_rate_percent: f64,
    /// Class assigned to each node.
    pub mapping: Vec<String>,
    /// Class labels in order of first appearance; the columns of `confusion`.
    pub classes: Vec<String>,
    /// `confusion[node][class]` member counts.
    pub confusion: Vec<Vec<usize>>,
    pub misclassified: usize,
    pub total: usize,
}

/// Scores a fitted model; see [`evaluate_assignments`].
pub fn error_rate(model: &KflannModel, ds: &Dataset) -> Result<EvalReport> {
    evaluate_assignments(&model.assignments, model.cluster_count(), ds)
}

/// Maps every cluster to the majority label of its members and counts the
/// patterns whose label differs.
///
/// A tie between classes goes to the class of the lowest-index member among
/// the tied classes.
pub fn evaluate_assignments(
    assignments: &[usize],
    clusters: usize,
    ds: &Dataset,
) -> Result<EvalReport> {
    if !ds.is_labeled() {
        return Err(Error::Unlabeled(ds.name().to_owned()));
    }
    if assignments.len() != ds.len() {
        return Err(Error::InvalidParam(format!(
            "{} assignments for {} patterns",
            assignments.len(),
            ds.len()
        )));
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= clusters) {
        return Err(Error::InvalidParam(format!(
            "assignment {bad} out of range for {clusters} clusters"
        )));
    }

    let classes: Vec<String> = ds.classes().into_iter().map(str::to_owned).collect();
    let class_of: Vec<usize> = (0..ds.len())
        .map(|i| {
            let label = ds.label(i).expect("labeled dataset");
            classes
                .iter()
                .position(|c| c == label)
                .expect("label is a class")
        })
        .collect();

    let mut confusion = vec![vec![0usize; classes.len()]; clusters];
    let mut first_member = vec![vec![usize::MAX; classes.len()]; clusters];
    for (i, (&node, &class)) in assignments.iter().zip(&class_of).enumerate() {
        confusion[node][class] += 1;
        first_member[node][class] = first_member[node][class].min(i);
    }

    let majority: Vec<usize> = confusion
        .iter()
        .zip(&first_member)
        .map(|(row, first)| {
            (0..classes.len())
                .max_by(|&a, &b| row[a].cmp(&row[b]).then(first[b].cmp(&first[a])))
                .unwrap_or(0)
        })
        .collect();

    let misclassified = assignments
        .iter()
        .zip(&class_of)
        .filter(|(&node, &class)| majority[node] != class)
        .count();

    Ok(EvalReport {
        cluster_count: clusters,
        error_rate_percent: misclassified as f64 / ds.len() as f64 * 100.0,
        mapping: majority.iter().map(|&c| classes[c].clone()).collect(),
        classes,
        confusion,
        misclassified,
        total: ds.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub vigilance: f64,
    pub clusters: usize,
    /// Absent for unlabeled data.
    pub error_rate_percent: Option<f64>,
    pub epochs: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub dataset: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn cluster_counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.clusters).collect()
    }

    /// `rho,clusters,error_rate_percent` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,clusters,error_rate_percent\n");
        for p in &self.points {
            let err = p
                .error_rate_percent
                .map(|e| e.to_string())
                .unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", p.vigilance, p.clusters, err));
        }
        out
    }
}

/// Fits the network once per grid point with a fixed tolerance.
pub fn vigilance_sweep(
    ds: &Dataset,
    delta: &ToleranceVector,
    grid: &[f64],
    max_epochs: usize,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParam("vigilance grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam(
            "vigilance grid must be strictly increasing".into(),
        ));
    }
    let points = grid
        .iter()
        .map(|&rho| {
            let params =
                KflannParams::new(Vigilance::new(rho)?, delta.clone()).with_max_epochs(max_epochs);
            let model = fit(ds, &params)?;
            let error_rate_percent = if ds.is_labeled() {
                Some(error_rate(&model, ds)?.error_rate_percent)
            } else {
                None
            };
            Ok(SweepPoint {
                vigilance: rho,
                clusters: model.cluster_count(),
                error_rate_percent,
                epochs: model.epochs_run,
                converged: model.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        dataset: ds.name().to_owned(),
        points,
    })
}

/// `start, start + step, ...` up to `end` inclusive, each rounded to 12 decimals so that `0:0.1:1` lands on 0.3 rather than
/// 0.30000000000000004.
pub fn linear_grid(start: f64, step: f64, end: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::InvalidParam(format!(
            "invalid grid {start}:{step}:{end}"
        )));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
///
/// `None` when either side is constant or the lengths differ.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (xs.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
