//! Per-feature tolerance vectors.
//!
//! The tolerance `δ_i` bounds how far feature `i` of a pattern may deviate
//! from a node's weight for that feature to count as matched.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::FeatureStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToleranceMethod {
    /// Population standard deviation of each feature.
    Stddev,
    /// Midpoint of the smallest and largest value gaps.
    Maxmin,
    /// Supplied from domain knowledge.
    Manual,
    /// Output of tolerance tuning.
    Tuned,
}

impl ToleranceMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ToleranceMethod::Stddev => "stddev",
            ToleranceMethod::Maxmin => "maxmin",
            ToleranceMethod::Manual => "manual",
            ToleranceMethod::Tuned => "tuned",
        }
    }
}

impl fmt::Display for ToleranceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ToleranceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stddev" | "std" | "eq4" => Ok(ToleranceMethod::Stddev),
            "maxmin" | "max-min" | "eq5" => Ok(ToleranceMethod::Maxmin),
            "manual" => Ok(ToleranceMethod::Manual),
            other => Err(Error::InvalidParam(format!(
                "unknown tolerance method {other:?} (expected stddev, maxmin, manual)"
            ))),
        }
    }
}

/// Non-negative, finite per-feature tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceVector {
    delta: Vec<f64>,
    method: ToleranceMethod,
}

impl ToleranceVector {
    pub fn new(delta: Vec<f64>, method: ToleranceMethod) -> Result<Self> {
        if let Some((i, v)) = delta
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidParam(format!(
                "tolerance for feature {} must be finite and >= 0, got {v}",
                i + 1
            )));
        }
        Ok(Self { delta, method })
    }

    /// The same tolerance for every one of `n` features.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n], ToleranceMethod::Manual)
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn method(&self) -> ToleranceMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }
}

pub fn tolerance_stddev(stats: &FeatureStats) -> ToleranceVector {
    ToleranceVector {
        delta: stats.stds(),
        method: ToleranceMethod::Stddev,
    }
}

/// `δ_i = (max_gap + min_gap) / 2`.
pub fn tolerance_maxmin(stats: &FeatureStats) -> ToleranceVector {
    ToleranceVector {
        delta: stats
            .iter()
            .map(|s| (s.max_gap + s.min_gap) / 2.0)
            .collect(),
        method: ToleranceMethod::Maxmin,
    }
}

pub fn tolerance_manual(values: &[f64], n: usize) -> Result<ToleranceVector> {
    if values.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: values.len(),
        });
    }
    ToleranceVector::new(values.to_vec(), ToleranceMethod::Manual)
}

/// Computes a tolerance vector by `method`; `manual` must carry values.
pub fn compute(
    method: ToleranceMethod,
    stats: &FeatureStats,
    manual: Option<&[f64]>,
) -> Result<ToleranceVector> {
    match method {
        ToleranceMethod::Stddev => Ok(tolerance_stddev(stats)),
        ToleranceMethod::Maxmin | ToleranceMethod::Tuned => Ok(tolerance_maxmin(stats)),
        ToleranceMethod::Manual => {
            let values = manual.ok_or_else(|| {
                Error::InvalidParam("manual tolerance requires explicit values".into())
            })?;
            tolerance_manual(values, stats.n())
        }
    }
}
