//! Per-feature statistics and normalization.
//!
//! All statistics use the population form (divide by the pattern count).
//! Degenerate features never error: a constant column has `std = 0`,
//! `min_gap = max_gap = 0`, z-scores to 0 and min-max scales to `new_min`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Statistics of a single feature column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Second-smallest distinct value minus the smallest; 0 for a constant column.
    pub min_gap: f64,
    /// `max - min`.
    pub max_gap: f64,
}

impl FeatureStat {
    pub fn is_constant(&self) -> bool {
        self.max == self.min
    }

    fn from_column(values: impl Iterator<Item = f64>) -> Self {
        let mut sorted: Vec<f64> = values.collect();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len() as f64;
        let min = sorted[0];
        let max = sorted[sorted.len() - 1];
        if min == max {
            return Self {
                mean: min,
                std: 0.0,
                min,
                max,
                min_gap: 0.0,
                max_gap: 0.0,
            };
        }
        let mean = sorted.iter().sum::<f64>() / count;
        let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count;
        let second = sorted
            .iter()
            .copied()
            .find(|&x| x > min)
            .expect("non-constant column has a second distinct value");
        Self {
            mean,
            std: var.sqrt(),
            min,
            max,
            min_gap: second - min,
            max_gap: max - min,
        }
    }
}

/// Per-feature statistics fitted on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    features: Vec<FeatureStat>,
}

impl FeatureStats {
    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn get(&self, d: usize) -> &FeatureStat {
        &self.features[d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureStat> {
        self.features.iter()
    }

    pub fn stds(&self) -> Vec<f64> {
        self.features.iter().map(|s| s.std).collect()
    }

    pub fn min_gaps(&self) -> Vec<f64> {
        self.features.iter().map(|s| s.min_gap).collect()
    }

    pub fn max_gaps(&self) -> Vec<f64> {
        self.features.iter().map(|s| s.max_gap).collect()
    }

    fn check(&self, ds: &Dataset) -> Result<()> {
        if self.n() != ds.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: ds.n(),
            });
        }
        Ok(())
    }
}

pub fn fit_stats(ds: &Dataset) -> FeatureStats {
    FeatureStats {
        features: (0..ds.n())
            .map(|d| FeatureStat::from_column(ds.column(d)))
            .collect(),
    }
}

/// Per-feature standardization `(x - mean) / std`.
pub fn zscore(ds: &Dataset, stats: &FeatureStats) -> Result<Dataset> {
    stats.check(ds)?;
    ds.map_features(|_, x| {
        x.iter()
            .zip(stats.iter())
            .map(|(&v, s)| {
                if s.std == 0.0 {
                    0.0
                } else {
                    (v - s.mean) / s.std
                }
            })
            .collect()
    })
}

/// Standardizes each pattern across its own features: every row ends up
/// with mean 0 and population std 1 (all-equal rows become all zeros).
pub fn zscore_patterns(ds: &Dataset) -> Result<Dataset> {
    ds.map_features(|_, x| {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let std = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if std == 0.0 {
            vec![0.0; x.len()]
        } else {
            x.iter().map(|v| (v - mean) / std).collect()
        }
    })
}

/// Linear rescaling of each feature from `[min, max]` onto `[new_min, new_max]`.
pub fn minmax(ds: &Dataset, stats: &FeatureStats, new_min: f64, new_max: f64) -> Result<Dataset> {
    check_range(new_min, new_max)?;
    stats.check(ds)?;
    ds.map_features(|_, x| {
        x.iter()
            .zip(stats.iter())
            .map(|(&v, s)| {
                if s.is_constant() {
                    return new_min;
                }
                let t = (v - s.min) / (s.max - s.min);
                // lerp form hits both endpoints exactly
                ((1.0 - t) * new_min + t * new_max).clamp(new_min, new_max)
            })
            .collect()
    })
}

fn check_range(new_min: f64, new_max: f64) -> Result<()> {
    if !(new_min.is_finite() && new_max.is_finite() && new_min < new_max) {
        return Err(Error::InvalidParam(format!(
            "min-max range requires new_min < new_max, got [{new_min}, {new_max}]"
        )));
    }
    Ok(())
}

/// Normalization applied before clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Normalization {
    None,
    /// Per-feature z-score.
    #[serde(rename = "zscore")]
    ZScore,
    /// Per-pattern z-score (each row standardized across its features).
    #[serde(rename = "zscore-pattern")]
    ZScorePattern,
    #[serde(rename = "minmax")]
    MinMax {
        new_min: f64,
        new_max: f64,
    },
}

impl Normalization {
    pub const MINMAX_UNIT: Normalization = Normalization::MinMax {
        new_min: 0.0,
        new_max: 1.0,
    };

    /// Short name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::ZScore => "zscore",
            Normalization::ZScorePattern => "zscore-pattern",
            Normalization::MinMax { .. } => "minmax",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Normalization::None),
            "zscore" | "z-score" => Ok(Normalization::ZScore),
            "zscore-pattern" | "zscore-row" => Ok(Normalization::ZScorePattern),
            "minmax" | "min-max" | "maxmin" => Ok(Normalization::MINMAX_UNIT),
            other => Err(Error::InvalidParam(format!(
                "unknown normalization {other:?} (expected none, zscore, zscore-pattern, minmax)"
            ))),
        }
    }
}

/// A normalization method together with the statistics it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub method: Normalization,
    pub fitted: FeatureStats,
}

impl NormalizationSpec {
    pub fn fit(method: Normalization, ds: &Dataset) -> Result<Self> {
        if let Normalization::MinMax { new_min, new_max } = method {
            check_range(new_min, new_max)?;
        }
        Ok(Self {
            method,
            fitted: fit_stats(ds),
        })
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        match self.method {
            Normalization::None => Ok(ds.clone()),
            Normalization::ZScore => zscore(ds, &self.fitted),
            Normalization::ZScorePattern => zscore_patterns(ds),
            Normalization::MinMax { new_min, new_max } => {
                minmax(ds, &self.fitted, new_min, new_max)
            }
        }
    }

    /// Maps a normalized point back to the original feature space.
    ///
    /// Returns `None` for per-pattern z-scores (row statistics are not
    /// recorded) and for constant features, whose original value is the
    /// recorded mean/min.
    pub fn invert(&self, point: &[f64]) -> Option<Vec<f64>> {
        if point.len() != self.fitted.n() {
            return None;
        }
        let stats = self.fitted.iter();
        match self.method {
            Normalization::None => Some(point.to_vec()),
            Normalization::ZScorePattern => None,
            Normalization::ZScore => Some(
                point
                    .iter()
                    .zip(stats)
                    .map(|(&z, s)| s.mean + z * s.std)
                    .collect(),
            ),
            Normalization::MinMax { new_min, new_max } => Some(
                point
                    .iter()
                    .zip(stats)
                    .map(|(&v, s)| s.min + (v - new_min) / (new_max - new_min) * (s.max - s.min))
                    .collect(),
            ),
        }
    }
}

pub fn normalize(ds: &Dataset, method: Normalization) -> Result<Dataset> {
    NormalizationSpec::fit(method, ds)?.apply(ds)
}
