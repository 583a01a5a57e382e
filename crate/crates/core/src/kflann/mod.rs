//! The K-means fast learning artificial neural network.
//!
//! The output layer starts empty and grows: a pattern that matches no
//! existing node founds a new one whose weights are a direct copy of the
//! pattern. A node matches when at least a fraction `ρ` (the vigilance) of
//! the features lie within their tolerance `δ_i` of the node's weights;
//! among matching nodes the one at the smallest squared Euclidean distance
//! wins.
//!
//! After each epoch the per-node centroids are computed. If they are the
//! same as the previous epoch's the network has converged. Otherwise the
//! member nearest each centroid is moved to the front of the presentation
//! order and the next epoch rebuilds the output layer from those seeds; see
//! [`SeedPolicy`] for how the seeds are treated.

mod tuning;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tolerance::ToleranceVector;

pub use tuning::{
    tune_tolerance, TuningDirection, TuningOutcome, TuningRule, TuningStep, TuningTrace,
    DEFAULT_MAX_ITERS,
};

/// Two centroid sets closer than this per coordinate are considered equal.
pub const CENTROID_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_MAX_EPOCHS: usize = 100;

/// Fraction of features that must match for a node to be eligible.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Vigilance(f64);

impl Vigilance {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParam(format!(
                "vigilance must lie in [0, 1], got {value}"
            )));
        }
        Ok(Self(value))
    }

    /// `f_match / f_total`.
    pub fn from_counts(f_match: usize, f_total: usize) -> Result<Self> {
        Self::new(vigilance_from_counts(f_match, f_total)?)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Smallest matched-feature count whose fraction of `n` reaches this vigilance.
    fn required_matches(self, n: usize) -> usize {
        (0..=n)
            .find(|&c| c as f64 / n as f64 >= self.0)
            .unwrap_or(n + 1)
    }
}

impl TryFrom<f64> for Vigilance {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Vigilance> for f64 {
    fn from(v: Vigilance) -> f64 {
        v.0
    }
}

impl fmt::Display for Vigilance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts decimals (`0.5294`) and ratios of feature counts (`18/34`).
impl FromStr for Vigilance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParam(format!("cannot parse vigilance {s:?}"));
        match s.split_once('/') {
            Some((num, den)) => {
                let num: usize = num.trim().parse().map_err(|_| bad())?;
                let den: usize = den.trim().parse().map_err(|_| bad())?;
                Self::from_counts(num, den)
            }
            None => Self::new(s.parse().map_err(|_| bad())?),
        }
    }
}

/// `ρ = f_match / f_total`.
pub fn vigilance_from_counts(f_match: usize, f_total: usize) -> Result<f64> {
    if f_total == 0 || f_match > f_total {
        return Err(Error::InvalidParam(format!(
            "vigilance needs 0 <= f_match <= f_total and f_total >= 1, got {f_match}/{f_total}"
        )));
    }
    Ok(f_match as f64 / f_total as f64)
}

/// How the centroid-nearest patterns seed the next epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Each seed founds its own node at the start of the next epoch; no new
    /// nodes are created after the first epoch, and a pattern that matches
    /// no node joins the nearest one.
    #[default]
    Anchored,
    /// Seeds are only moved to the front of the order; the next epoch runs
    /// the ordinary matching rules from an empty output layer, so seeds may
    /// merge.
    Rebuild,
}

impl FromStr for SeedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anchored" => Ok(SeedPolicy::Anchored),
            "rebuild" => Ok(SeedPolicy::Rebuild),
            other => Err(Error::InvalidParam(format!(
                "unknown seed policy {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KflannParams {
    pub vigilance: Vigilance,
    pub tolerance: ToleranceVector,
    /// Upper bound on epochs; reaching it leaves the model unconverged.
    pub max_epochs: usize,
    pub seed_policy: SeedPolicy,
}

impl KflannParams {
    pub fn new(vigilance: Vigilance, tolerance: ToleranceVector) -> Self {
        Self {
            vigilance,
            tolerance,
            max_epochs: DEFAULT_MAX_EPOCHS,
            seed_policy: SeedPolicy::default(),
        }
    }

    pub fn with_max_epochs(mut self, max_epochs: usize) -> Self {
        self.max_epochs = max_epochs;
        self
    }

    pub fn with_seed_policy(mut self, policy: SeedPolicy) -> Self {
        self.seed_policy = policy;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.tolerance.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: self.tolerance.len(),
            });
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidParam("max_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// A cluster prototype; its weights are a copy of the founding pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputNode {
    pub weights: Vec<f64>,
    /// Index of the founding pattern.
    pub founder: usize,
    /// Patterns assigned to this node in the current epoch, in presentation order.
    pub members: Vec<usize>,
}

impl OutputNode {
    pub fn found(ds: &Dataset, pattern: usize) -> Self {
        Self {
            weights: ds.features(pattern).to_vec(),
            founder: pattern,
            members: vec![pattern],
        }
    }

    pub fn centroid(&self, ds: &Dataset) -> Vec<f64> {
        let mut c = vec![0.0; self.weights.len()];
        for &m in &self.members {
            for (acc, v) in c.iter_mut().zip(ds.features(m)) {
                *acc += v;
            }
        }
        let k = self.members.len() as f64;
        c.iter_mut().for_each(|v| *v /= k);
        c
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn matched_features(weights: &[f64], pattern: &[f64], delta: &[f64]) -> usize {
    weights
        .iter()
        .zip(pattern)
        .zip(delta)
        .filter(|((w, x), d)| *d * *d - (*w - *x) * (*w - *x) >= 0.0)
        .count()
}

/// Fraction of features with `δ_i² - (w_i - x_i)² >= 0`.
pub fn match_score(node: &OutputNode, pattern: &[f64], delta: &ToleranceVector) -> Result<f64> {
    let n = node.weights.len();
    for found in [pattern.len(), delta.len()] {
        if found != n {
            return Err(Error::Dimension { expected: n, found });
        }
    }
    Ok(matched_features(&node.weights, pattern, delta.delta()) as f64 / n as f64)
}

/// Indices of all nodes whose match score reaches the vigilance.
pub fn find_matches(nodes: &[OutputNode], pattern: &[f64], params: &KflannParams) -> Vec<usize> {
    let n = pattern.len();
    let needed = params.vigilance.required_matches(n);
    let delta = params.tolerance.delta();
    nodes
        .iter()
        .enumerate()
        .filter(|(_, node)| matched_features(&node.weights, pattern, delta) >= needed)
        .map(|(j, _)| j)
        .collect()
}

/// The matched node nearest to the pattern; ties go to the lowest index.
pub fn winner(matched: &[usize], pattern: &[f64], nodes: &[OutputNode]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in matched {
        let d = squared_distance(&nodes[j].weights, pattern);
        match best {
            Some((bj, bd)) if d > bd || (d == bd && j > bj) => {}
            _ => best = Some((j, d)),
        }
    }
    best.map(|(j, _)| j)
        .ok_or_else(|| Error::InvalidParam("winner requires at least one matched node".into()))
}

/// Result of presenting every pattern once.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub nodes: Vec<OutputNode>,
    /// Pattern index to node index.
    pub assignments: Vec<usize>,
}

impl Epoch {
    pub fn centroids(&self, ds: &Dataset) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|node| node.centroid(ds)).collect()
    }

    /// For every node, the member nearest its centroid (ties to the lowest
    /// pattern index), in node order.
    pub fn seeds(&self, ds: &Dataset) -> Vec<usize> {
        self.nodes
            .iter()
            .map(|node| {
                let c = node.centroid(ds);
                let mut best = (usize::MAX, f64::INFINITY);
                for &m in &node.members {
                    let d = squared_distance(ds.features(m), &c);
                    if d < best.1 || (d == best.1 && m < best.0) {
                        best = (m, d);
                    }
                }
                best.0
            })
            .collect()
    }
}

/// Presents the patterns in `order` once.
///
/// Each index in `anchors` founds its own node before anything else is
/// presented. When `grow` is false a pattern that matches no node joins the
/// nearest existing node instead of founding a new one; growth is always
/// allowed while the layer is still empty.
pub fn run_epoch(
    ds: &Dataset,
    params: &KflannParams,
    order: &[usize],
    anchors: &[usize],
    grow: bool,
) -> Epoch {
    let mut nodes: Vec<OutputNode> = anchors.iter().map(|&s| OutputNode::found(ds, s)).collect();
    let mut assignments = vec![usize::MAX; ds.len()];
    for (j, &s) in anchors.iter().enumerate() {
        assignments[s] = j;
    }
    let mut all = Vec::new();
    for &i in order {
        if assignments[i] != usize::MAX {
            continue;
        }
        let x = ds.features(i);
        let matched = find_matches(&nodes, x, params);
        let target = if !matched.is_empty() {
            winner(&matched, x, &nodes).expect("non-empty match list")
        } else if grow || nodes.is_empty() {
            nodes.push(OutputNode {
                weights: x.to_vec(),
                founder: i,
                members: Vec::new(),
            });
            nodes.len() - 1
        } else {
            all.clear();
            all.extend(0..nodes.len());
            winner(&all, x, &nodes).expect("output layer is not empty")
        };
        nodes[target].members.push(i);
        assignments[i] = target;
    }
    Epoch { nodes, assignments }
}

/// Whether two centroid multisets agree within `tol` per coordinate.
pub fn same_centroids(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|ca| {
        let hit = b.iter().enumerate().position(|(j, cb)| {
            !used[j] && ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| (x - y).abs() <= tol)
        });
        match hit {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

/// A trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KflannModel {
    pub nodes: Vec<OutputNode>,
    /// Pattern index to node index.
    pub assignments: Vec<usize>,
    pub epochs_run: usize,
    pub converged: bool,
    /// Centroids after each epoch, in node order.
    pub centroid_history: Vec<Vec<Vec<f64>>>,
    /// Presentation order used by the final epoch.
    pub working_order: Vec<usize>,
    pub seed_policy: SeedPolicy,
}

impl KflannModel {
    pub fn cluster_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        self.centroid_history
            .last()
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Runs the epoch that would follow the final one and returns it.
    ///
    /// For a converged model its centroids equal [`KflannModel::centroids`].
    pub fn next_epoch(&self, ds: &Dataset, params: &KflannParams) -> Epoch {
        let last = Epoch {
            nodes: self.nodes.clone(),
            assignments: self.assignments.clone(),
        };
        let seeds = last.seeds(ds);
        let order = reorder(&self.working_order, &seeds);
        step(ds, params, &order, &seeds)
    }
}

/// Moves `seeds` to the front of `order`, keeping everything else in place.
fn reorder(order: &[usize], seeds: &[usize]) -> Vec<usize> {
    let mut out = seeds.to_vec();
    out.extend(order.iter().copied().filter(|i| !seeds.contains(i)));
    out
}

fn step(ds: &Dataset, params: &KflannParams, order: &[usize], seeds: &[usize]) -> Epoch {
    match params.seed_policy {
        SeedPolicy::Anchored => run_epoch(ds, params, order, seeds, false),
        SeedPolicy::Rebuild => run_epoch(ds, params, order, &[], true),
    }
}

/// Trains the network until the centroids stop moving or `max_epochs` is hit.
pub fn fit(ds: &Dataset, params: &KflannParams) -> Result<KflannModel> {
    params.validate(ds.n())?;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut epoch = run_epoch(ds, params, &order, &[], true);
    let mut history = vec![epoch.centroids(ds)];
    let mut converged = false;

    while history.len() < params.max_epochs {
        let seeds = epoch.seeds(ds);
        order = reorder(&order, &seeds);
        epoch = step(ds, params, &order, &seeds);
        let centroids = epoch.centroids(ds);
        let stable = same_centroids(&centroids, &history[history.len() - 1], CENTROID_TOLERANCE);
        history.push(centroids);
        if stable {
            converged = true;
            break;
        }
    }

    Ok(KflannModel {
        nodes: epoch.nodes,
        assignments: epoch.assignments,
        epochs_run: history.len(),
        converged,
        centroid_history: history,
        working_order: order,
        seed_policy: params.seed_policy,
    })
}
