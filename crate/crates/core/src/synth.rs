//! Seeded Gaussian-blob generators for the six synthetic benchmark sets.
//!
//! | preset | n | classes | centers | noise |
//! |---|---|---|---|---|
//! | 1 | 2 | 500/500 | 16 apart per coordinate | truncated at 2σ |
//! | 2 | 2 | 500/500 | 3σ apart on the diagonal | plain |
//! | 3 | 2 | 500/500 | 1σ apart on the diagonal | plain |
//! | 4 | 8 | 250/150/100 | lattice, spacing 16 | truncated at 2σ |
//! | 5 | 8 | 150/150/100 | lattice, spacing 16 | truncated at 2σ |
//! | 6 | 8 | 100/150/100 | lattice, spacing 0.5 | plain |
//!
//! Truncation rejects and redraws any coordinate beyond the bound, which
//! makes presets 1, 4 and 5 certifiably separable: the boxes holding each
//! class are further apart than their own diameters.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Pattern};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 7;
pub const PRESETS: [u8; 6] = [1, 2, 3, 4, 5, 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separation {
    Well,
    Half,
    None,
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Separation::Well => "well",
            Separation::Half => "half",
            Separation::None => "none",
        })
    }
}

impl FromStr for Separation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "well" => Ok(Separation::Well),
            "half" => Ok(Separation::Half),
            "none" => Ok(Separation::None),
            other => Err(Error::InvalidParam(format!("unknown separation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Preset number, `None` for custom specs.
    pub id: Option<u8>,
    pub n: usize,
    pub class_counts: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub sigma: f64,
    /// Coordinates are redrawn until `|z| <= truncate`.
    pub truncate: Option<f64>,
    pub separation: Option<Separation>,
    pub seed: u64,
}

fn diagonal_pair(offset: f64, sep: Separation, seed: u64, id: u8) -> SynthSpec {
    SynthSpec {
        id: Some(id),
        n: 2,
        class_counts: vec![500, 500],
        centers: vec![vec![0.0, 0.0], vec![offset, offset]],
        sigma: 1.0,
        truncate: (sep == Separation::Well).then_some(2.0),
        separation: Some(sep),
        seed,
    }
}

fn lattice(
    id: u8,
    counts: [usize; 3],
    spacing: f64,
    truncate: Option<f64>,
    seed: u64,
) -> SynthSpec {
    let even: Vec<f64> = (0..8)
        .map(|d| if d % 2 == 0 { spacing } else { 0.0 })
        .collect();
    let odd: Vec<f64> = (0..8)
        .map(|d| if d % 2 == 1 { spacing } else { 0.0 })
        .collect();
    SynthSpec {
        id: Some(id),
        n: 8,
        class_counts: counts.to_vec(),
        centers: vec![vec![0.0; 8], even, odd],
        sigma: 1.0,
        truncate,
        separation: None,
        seed,
    }
}

impl SynthSpec {
    pub fn preset(id: u8, seed: u64) -> Result<Self> {
        let diag = std::f64::consts::FRAC_1_SQRT_2;
        Ok(match id {
            1 => diagonal_pair(16.0, Separation::Well, seed, 1),
            2 => diagonal_pair(3.0 * diag, Separation::Half, seed, 2),
            3 => diagonal_pair(diag, Separation::None, seed, 3),
            4 => lattice(4, [250, 150, 100], 16.0, Some(2.0), seed),
            5 => lattice(5, [150, 150, 100], 16.0, Some(2.0), seed),
            6 => lattice(6, [100, 150, 100], 0.5, None, seed),
            other => {
                return Err(Error::InvalidParam(format!(
                    "synthetic preset must be 1-6, got {other}"
                )))
            }
        })
    }

    pub fn custom(
        centers: Vec<Vec<f64>>,
        class_counts: Vec<usize>,
        sigma: f64,
        truncate: Option<f64>,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            id: None,
            n: centers.first().map_or(0, Vec::len),
            class_counts,
            centers,
            sigma,
            truncate,
            separation: None,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> String {
        match self.id {
            Some(id) => format!("synthetic-{id}"),
            None => "synthetic-custom".to_owned(),
        }
    }

    pub fn len(&self) -> usize {
        self.class_counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.centers.iter().any(|c| c.len() != self.n) {
            return Err(Error::InvalidParam(
                "centers must share a non-zero dimension".into(),
            ));
        }
        if self.class_counts.len() != self.centers.len() {
            return Err(Error::InvalidParam(format!(
                "{} class counts for {} centers",
                self.class_counts.len(),
                self.centers.len()
            )));
        }
        if self.class_counts.contains(&0) {
            return Err(Error::InvalidParam("class counts must be positive".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParam("sigma must be positive".into()));
        }
        if self.truncate.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::InvalidParam(
                "truncation bound must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Draws the patterns class by class; labels are `1`, `2`, ...
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut patterns = Vec::with_capacity(spec.len());
    for (class, (center, &count)) in spec.centers.iter().zip(&spec.class_counts).enumerate() {
        let label = (class + 1).to_string();
        for _ in 0..count {
            let features = center
                .iter()
                .map(|c| {
                    let z = loop {
                        let z: f64 = rng.sample(StandardNormal);
                        if spec.truncate.is_none_or(|t| z.abs() <= t) {
                            break z;
                        }
                    };
                    c + spec.sigma * z
                })
                .collect();
            patterns.push(Pattern::labeled(features, label.clone()));
        }
    }
    let ds = Dataset::new(spec.name(), patterns)?;
    Ok(ds.with_expected_clusters(spec.class_counts.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_counts(ds: &Dataset) -> Vec<usize> {
        ds.classes()
            .iter()
            .map(|c| (0..ds.len()).filter(|&i| ds.label(i) == Some(c)).count())
            .collect()
    }

    #[test]
    fn preset_shapes() {
        let cases: [(u8, usize, &[usize]); 6] = [
            (1, 2, &[500, 500]),
            (2, 2, &[500, 500]),
            (3, 2, &[500, 500]),
            (4, 8, &[250, 150, 100]),
            (5, 8, &[150, 150, 100]),
            (6, 8, &[100, 150, 100]),
        ];
        for (id, n, counts) in cases {
            let ds = generate(&SynthSpec::preset(id, 1).unwrap()).unwrap();
            assert_eq!(ds.n(), n);
            assert_eq!(class_counts(&ds), counts);
            assert_eq!(ds.expected_clusters(), Some(counts.len()));
        }
        assert!(SynthSpec::preset(7, 1).is_err());
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SynthSpec::preset(2, 42).unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec::preset(2, 43).unwrap();
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn well_separated_is_certifiable() {
        let ds = generate(&SynthSpec::preset(1, DEFAULT_SEED).unwrap()).unwrap();
        let d = |a: usize, b: usize| -> f64 {
            ds.features(a)
                .iter()
                .zip(ds.features(b))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let (mut intra, mut inter) = (0.0f64, f64::INFINITY);
        for a in 0..ds.len() {
            for b in a + 1..ds.len() {
                if ds.label(a) == ds.label(b) {
                    intra = intra.max(d(a, b));
                } else {
                    inter = inter.min(d(a, b));
                }
            }
        }
        assert!(inter > intra, "inter {inter} <= intra {intra}");
    }

    #[test]
    fn custom_spec_validation() {
        assert!(SynthSpec::custom(vec![vec![0.0], vec![1.0]], vec![3, 3], 1.0, None, 0).is_ok());
        assert!(SynthSpec::custom(vec![vec![0.0], vec![1.0]], vec![3], 1.0, None, 0).is_err());
        assert!(
            SynthSpec::custom(vec![vec![0.0], vec![1.0, 2.0]], vec![3, 3], 1.0, None, 0).is_err()
        );
        assert!(SynthSpec::custom(vec![vec![0.0]], vec![0], 1.0, None, 0).is_err());
        assert!(SynthSpec::custom(vec![vec![0.0]], vec![2], 0.0, None, 0).is_err());
    }
}
