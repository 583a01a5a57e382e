//! The end-to-end pipeline behind a single run.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::error_rate;
use crate::kflann::{
    fit, tune_tolerance, KflannParams, SeedPolicy, TuningRule, Vigilance, DEFAULT_MAX_EPOCHS,
    DEFAULT_MAX_ITERS,
};
use crate::preprocess::{fit_stats, normalize, Normalization};
use crate::report::{RunReport, SCHEMA_VERSION};
use crate::tolerance::{compute, ToleranceMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub normalization: Normalization,
    pub tolerance: ToleranceMethod,
    /// Required when `tolerance` is manual.
    pub manual_tolerance: Option<Vec<f64>>,
    pub vigilance: Vigilance,
    /// Tune the tolerance toward this many clusters before fitting.
    pub expected_clusters: Option<usize>,
    pub max_epochs: usize,
    pub max_iters: usize,
    pub tuning_rule: TuningRule,
    pub seed_policy: SeedPolicy,
}

impl ExperimentConfig {
    pub fn new(
        normalization: Normalization,
        tolerance: ToleranceMethod,
        vigilance: Vigilance,
    ) -> Self {
        Self {
            normalization,
            tolerance,
            manual_tolerance: None,
            vigilance,
            expected_clusters: None,
            max_epochs: DEFAULT_MAX_EPOCHS,
            max_iters: DEFAULT_MAX_ITERS,
            tuning_rule: TuningRule::default(),
            seed_policy: SeedPolicy::default(),
        }
    }

    pub fn tuned(mut self, expected_clusters: usize) -> Self {
        self.expected_clusters = Some(expected_clusters);
        self
    }

    pub fn with_manual_tolerance(mut self, values: Vec<f64>) -> Self {
        self.tolerance = ToleranceMethod::Manual;
        self.manual_tolerance = Some(values);
        self
    }
}

/// Normalizes, sets the tolerance, optionally tunes it, fits and, for
/// labeled data, scores the result.
pub fn run_experiment(ds: &Dataset, cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.tolerance == ToleranceMethod::Tuned {
        return Err(Error::InvalidParam(
            "use expected_clusters to request tuning; the starting tolerance must be stddev, maxmin or manual".into(),
        ));
    }
    let data = normalize(ds, cfg.normalization)?;
    let stats = fit_stats(&data);
    let tolerance = compute(cfg.tolerance, &stats, cfg.manual_tolerance.as_deref())?;
    let mut params = KflannParams::new(cfg.vigilance, tolerance)
        .with_max_epochs(cfg.max_epochs)
        .with_seed_policy(cfg.seed_policy);

    let tuning = match cfg.expected_clusters {
        Some(expected) => {
            let out = tune_tolerance(&data, &params, expected, cfg.max_iters, cfg.tuning_rule)?;
            params.tolerance = out.tolerance;
            Some(out.trace)
        }
        None => None,
    };

    let model = fit(&data, &params)?;
    let evaluation = if data.is_labeled() {
        Some(error_rate(&model, &data)?)
    } else {
        None
    };

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        dataset: ds.name().to_owned(),
        patterns: ds.len(),
        features: ds.n(),
        seed: None,
        normalization: cfg.normalization.name().to_owned(),
        tolerance_method: cfg.tolerance.name().to_owned(),
        tuned: tuning.is_some(),
        tolerance: params.tolerance.delta().to_vec(),
        vigilance: cfg.vigilance.value(),
        seed_policy: cfg.seed_policy,
        max_epochs: cfg.max_epochs,
        clusters: model.cluster_count(),
        error_rate_percent: evaluation.as_ref().map(|e| e.error_rate_percent),
        epochs: model.epochs_run,
        converged: model.converged,
        tuning,
        evaluation,
        centroids: model.centroids().to_vec(),
        assignments: model.assignments,
    })
}
