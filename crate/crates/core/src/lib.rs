//! K-means fast learning artificial neural network (KFLANN) clustering.
//!
//! ```
//! use kflann_core::{fit, fit_stats, tolerance_maxmin, Dataset, KflannParams, Vigilance};
//!
//! let ds = Dataset::from_rows("demo", vec![vec![0.0, 0.0], vec![0.2, 0.1], vec![9.0, 9.0]]).unwrap();
//! let delta = tolerance_maxmin(&fit_stats(&ds));
//! let model = fit(&ds, &KflannParams::new(Vigilance::new(1.0).unwrap(), delta)).unwrap();
//! assert_eq!(model.cluster_count(), 2);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod kflann;
pub mod preprocess;
pub mod report;
pub mod synth;
pub mod tables;
pub mod tolerance;

#[cfg(test)]
mod testkit;

pub use dataset::{
    describe, load_csv, parse_csv, save_csv, write_csv, Dataset, DatasetManifestEntry,
    DatasetSummary, LabelColumn, Manifest, Pattern,
};
pub use error::{Error, Result};
pub use eval::{
    error_rate, evaluate_assignments, linear_grid, spearman, vigilance_sweep, EvalReport,
    SweepPoint, SweepResult,
};
pub use experiment::{run_experiment, ExperimentConfig};
pub use kflann::{
    find_matches, fit, match_score, run_epoch, same_centroids, tune_tolerance,
    vigilance_from_counts, winner, Epoch, KflannModel, KflannParams, OutputNode, SeedPolicy,
    TuningDirection, TuningOutcome, TuningRule, TuningStep, TuningTrace, Vigilance,
    CENTROID_TOLERANCE, DEFAULT_MAX_EPOCHS, DEFAULT_MAX_ITERS,
};
pub use preprocess::{
    fit_stats, minmax, normalize, zscore, zscore_patterns, FeatureStat, FeatureStats,
    Normalization, NormalizationSpec,
};
pub use report::{ReportFormat, RunReport, Tabular, CSV_COLUMNS, SCHEMA_VERSION};
pub use synth::{generate, Separation, SynthSpec};
pub use tables::{run_table, BenchRow, BenchSources, PublishedRow, TableSpec, TABLE_IDS};
pub use tolerance::{
    compute as compute_tolerance, tolerance_manual, tolerance_maxmin, tolerance_stddev,
    ToleranceMethod, ToleranceVector,
};
