//! Searching for a tolerance that yields a given number of clusters.
//!
//! Too few clusters means the tolerance is too loose, so every `δ_i` moves
//! toward its smallest value gap; too many means it is too tight, so every
//! `δ_i` moves toward the feature's range. Each probe is a single growing
//! epoch over the patterns in dataset order.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_epoch, KflannParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::preprocess::fit_stats;
use crate::tolerance::{ToleranceMethod, ToleranceVector};

pub const DEFAULT_MAX_ITERS: usize = 50;

/// How the tolerance moves between probes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuningRule {
    /// Halves a bracket that starts at `[min_gap, max_gap]`; each probe
    /// becomes the new bound on the side it overshot.
    #[default]
    Bisect,
    /// Always moves halfway toward the fixed endpoint, `min_gap` or
    /// `max_gap`. Can oscillate without ever reaching the target.
    Literal,
}

impl FromStr for TuningRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bisect" => Ok(TuningRule::Bisect),
            "literal" => Ok(TuningRule::Literal),
            other => Err(Error::InvalidParam(format!(
                "unknown tuning rule {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuningDirection {
    /// Too few clusters: tighten toward the smallest gaps.
    DownTowardMin,
    /// Too many clusters: loosen toward the ranges.
    UpTowardMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningStep {
    /// 1-based.
    pub iteration: usize,
    pub delta: Vec<f64>,
    pub clusters: usize,
    /// `None` on the probe that hit the target.
    pub direction: Option<TuningDirection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningTrace {
    pub expected: usize,
    pub steps: Vec<TuningStep>,
    pub reached: bool,
    /// Iteration whose tolerance was returned.
    pub selected_iteration: usize,
}

impl TuningTrace {
    pub fn cluster_counts(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.clusters).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningOutcome {
    pub tolerance: ToleranceVector,
    pub trace: TuningTrace,
}

/// Searches for a tolerance that gives `expected` clusters at the vigilance
/// in `params`; the tolerance in `params` is ignored.
///
/// When the target is never hit the probe whose count came closest is
/// returned (later probes win ties) and `trace.reached` is false.
pub fn tune_tolerance(
    ds: &Dataset,
    params: &KflannParams,
    expected: usize,
    max_iters: usize,
    rule: TuningRule,
) -> Result<TuningOutcome> {
    if expected == 0 || expected > ds.len() {
        return Err(Error::InvalidParam(format!(
            "expected cluster count must lie in [1, {}], got {expected}",
            ds.len()
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParam("max_iters must be >= 1".into()));
    }

    let stats = fit_stats(ds);
    let (min_gap, max_gap) = (stats.min_gaps(), stats.max_gaps());
    let (mut lo, mut hi) = (min_gap.clone(), max_gap.clone());
    let mut delta: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (a + b) / 2.0).collect();
    let order: Vec<usize> = (0..ds.len()).collect();

    let mut steps = Vec::new();
    let mut best: Option<(usize, usize)> = None; // (distance to target, step index)
    let mut reached = false;

    for iteration in 1..=max_iters {
        let mut probe = params.clone();
        probe.tolerance = ToleranceVector::new(delta.clone(), ToleranceMethod::Tuned)?;
        let clusters = run_epoch(ds, &probe, &order, &[], true).nodes.len();

        let gap = clusters.abs_diff(expected);
        if best.is_none_or(|(g, _)| gap <= g) {
            best = Some((gap, steps.len()));
        }

        let direction = match clusters.cmp(&expected) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some(TuningDirection::DownTowardMin),
            std::cmp::Ordering::Greater => Some(TuningDirection::UpTowardMax),
        };
        steps.push(TuningStep {
            iteration,
            delta: delta.clone(),
            clusters,
            direction,
        });

        let Some(direction) = direction else {
            reached = true;
            break;
        };
        let toward = match direction {
            TuningDirection::DownTowardMin => {
                if rule == TuningRule::Bisect {
                    hi.clone_from(&delta);
                }
                &lo
            }
            TuningDirection::UpTowardMax => {
                if rule == TuningRule::Bisect {
                    lo.clone_from(&delta);
                }
                &hi
            }
        };
        delta = delta
            .iter()
            .zip(toward)
            .map(|(d, t)| (d + t) / 2.0)
            .collect();
    }

    let (_, chosen) = best.expect("at least one probe ran");
    let tolerance = ToleranceVector::new(steps[chosen].delta.clone(), ToleranceMethod::Tuned)?;
    Ok(TuningOutcome {
        tolerance,
        trace: TuningTrace {
            expected,
            selected_iteration: steps[chosen].iteration,
            steps,
            reached,
        },
    })
}
