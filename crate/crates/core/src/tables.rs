//! Published benchmark results and the runner that reproduces them.
//!
//! Vigilance values are kept as the feature-count ratios the published
//! decimals round, e.g. `8/9` rather than `0.8889`. The rounded decimal can
//! be slightly larger than the ratio and then demands one more matching
//! feature.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Manifest};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::kflann::Vigilance;
use crate::preprocess::Normalization;
use crate::report::{fmt_opt, Tabular};
use crate::synth::{generate, SynthSpec};
use crate::tolerance::ToleranceMethod;

/// Shape of a benchmark dataset as published.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub title: &'static str,
    pub patterns: usize,
    pub features: usize,
    pub clusters: usize,
    pub class_counts: &'static [usize],
}

pub const DATASETS: [DatasetInfo; 8] = [
    DatasetInfo {
        name: "iris",
        title: "Iris",
        patterns: 150,
        features: 4,
        clusters: 3,
        class_counts: &[50, 50, 50],
    },
    DatasetInfo {
        name: "wine",
        title: "Wine",
        patterns: 178,
        features: 13,
        clusters: 3,
        class_counts: &[59, 70, 49],
    },
    DatasetInfo {
        name: "glass",
        title: "Glass",
        patterns: 214,
        features: 9,
        clusters: 7,
        class_counts: &[70, 76, 17, 0, 13, 9, 29],
    },
    DatasetInfo {
        name: "haberman",
        title: "Haberman",
        patterns: 306,
        features: 3,
        clusters: 2,
        class_counts: &[227, 79],
    },
    DatasetInfo {
        name: "new_thyroid",
        title: "New Thyroid",
        patterns: 215,
        features: 5,
        clusters: 3,
        class_counts: &[150, 35, 30],
    },
    DatasetInfo {
        name: "segment",
        title: "Image Segmentation",
        patterns: 210,
        features: 19,
        clusters: 7,
        class_counts: &[30; 7],
    },
    DatasetInfo {
        name: "pima",
        title: "Pima Indian diabetes",
        patterns: 768,
        features: 8,
        clusters: 2,
        class_counts: &[500, 268],
    },
    DatasetInfo {
        name: "ionosphere",
        title: "Ionosphere",
        patterns: 351,
        features: 34,
        clusters: 2,
        class_counts: &[225, 126],
    },
];

pub fn dataset_info(name: &str) -> Option<&'static DatasetInfo> {
    DATASETS.iter().find(|d| d.name == name)
}

/// One published (dataset, vigilance) result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRow {
    pub dataset: &'static str,
    /// Decimal or ratio, parsed with [`Vigilance`]'s `FromStr`.
    pub vigilance: &'static str,
    pub clusters: usize,
    pub error_rate_percent: f64,
}

const fn row(
    dataset: &'static str,
    vigilance: &'static str,
    clusters: usize,
    error: f64,
) -> PublishedRow {
    PublishedRow {
        dataset,
        vigilance,
        clusters,
        error_rate_percent: error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub id: u8,
    pub title: &'static str,
    pub normalization: Normalization,
    pub tolerance: ToleranceMethod,
    pub rows: &'static [PublishedRow],
}

impl TableSpec {
    /// The synthetic table tunes every row to its class count.
    pub fn is_synthetic(&self) -> bool {
        self.id == 9
    }
}

const TABLE3: &[PublishedRow] = &[
    row("iris", "4/4", 3, 7.3333),
    row("new_thyroid", "5/5", 4, 20.4651),
    row("new_thyroid", "4/5", 2, 24.6512),
    row("ionosphere", "18/34", 2, 29.6296),
    row("pima", "5/8", 2, 33.4635),
    row("wine", "10/13", 3, 35.3933),
    row("glass", "8/9", 7, 54.6729),
    row("haberman", "1/3", 6, 70.2614),
    row("segment", "17/19", 4, 79.0476),
    row("segment", "18/19", 8, 64.4286),
];

const TABLE4: &[PublishedRow] = &[
    row("iris", "2/4", 3, 10.0),
    row("new_thyroid", "2/5", 2, 30.2326),
    row("ionosphere", "9/34", 2, 31.3390),
    row("pima", "2/8", 2, 34.2448),
    row("wine", "4/13", 3, 38.2022),
    row("new_thyroid", "3/5", 4, 45.5814),
    row("haberman", "1/3", 2, 48.6928),
    row("segment", "13/19", 7, 64.2857),
    row("segment", "14/19", 7, 64.7619),
    row("glass", "4/9", 7, 67.2897),
];

const TABLE5: &[PublishedRow] = &[
    row("iris", "3/4", 3, 5.3333),
    row("new_thyroid", "4/5", 4, 16.7442),
    row("haberman", "2/3", 2, 25.4092),
    row("wine", "12/13", 3, 32.5843),
    row("ionosphere", "28/34", 2, 42.4501),
    row("pima", "6/8", 2, 48.4375),
    row("glass", "8/9", 7, 52.8037),
    row("segment", "0.9", 6, 80.25),
    row("segment", "19/19", 10, 82.30),
];

const TABLE6: &[PublishedRow] = &[
    row("iris", "2/4", 3, 5.3333),
    row("new_thyroid", "1/5", 3, 13.4884),
    row("ionosphere", "11/34", 2, 40.1709),
    row("wine", "6/13", 3, 43.2584),
    row("pima", "1/8", 2, 48.3073),
    row("haberman", "1/3", 2, 53.2680),
    row("glass", "4/9", 7, 56.0748),
    row("segment", "13/19", 6, 87.6190),
];

const TABLE7: &[PublishedRow] = &[
    row("pima", "5/8", 2, 0.0),
    row("iris", "4/4", 3, 10.0),
    row("wine", "10/13", 3, 14.6067),
    row("new_thyroid", "4/5", 2, 21.8605),
    row("new_thyroid", "5/5", 4, 12.5581),
    row("ionosphere", "18/34", 2, 29.6296),
    row("glass", "8/9", 7, 49.5327),
    row("segment", "18/19", 8, 59.5238),
    row("haberman", "2/3", 3, 60.7843),
    row("haberman", "3/3", 6, 80.7190),
];

const TABLE8: &[PublishedRow] = &[
    row("pima", "2/8", 2, 0.1302),
    row("iris", "2/4", 3, 12.0),
    row("new_thyroid", "2/5", 2, 30.2326),
    row("new_thyroid", "5/5", 4, 12.5581),
    row("ionosphere", "9/34", 2, 31.3390),
    row("haberman", "1/3", 2, 54.5752),
    row("segment", "14/19", 7, 57.1429),
    row("wine", "4/13", 3, 64.6067),
    row("glass", "4/9", 7, 65.8879),
];

const TABLE9: &[PublishedRow] = &[
    row("synthetic-1", "1", 2, 0.0),
    row("synthetic-2", "1", 2, 1.8),
    row("synthetic-3", "1", 2, 29.2),
    row("synthetic-4", "1", 3, 0.0),
    row("synthetic-5", "1", 3, 0.0),
    row("synthetic-6", "1", 3, 54.2857),
];

pub const TABLE_IDS: [u8; 7] = [3, 4, 5, 6, 7, 8, 9];

pub fn table(id: u8) -> Option<TableSpec> {
    use Normalization as N;
    use ToleranceMethod as T;
    let (title, normalization, tolerance, rows) = match id {
        3 => (
            "non-normalized data, max-min tolerance",
            N::None,
            T::Maxmin,
            TABLE3,
        ),
        4 => (
            "non-normalized data, standard-deviation tolerance",
            N::None,
            T::Stddev,
            TABLE4,
        ),
        5 => (
            "z-score data, max-min tolerance",
            N::ZScorePattern,
            T::Maxmin,
            TABLE5,
        ),
        6 => (
            "z-score data, standard-deviation tolerance",
            N::ZScorePattern,
            T::Stddev,
            TABLE6,
        ),
        7 => (
            "min-max data, max-min tolerance",
            N::MINMAX_UNIT,
            T::Maxmin,
            TABLE7,
        ),
        8 => (
            "min-max data, standard-deviation tolerance",
            N::MINMAX_UNIT,
            T::Stddev,
            TABLE8,
        ),
        9 => (
            "synthetic data, tuned tolerance",
            N::None,
            T::Maxmin,
            TABLE9,
        ),
        _ => return None,
    };
    Some(TableSpec {
        id,
        title,
        normalization,
        tolerance,
        rows,
    })
}

/// Reproduced result next to the published one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub table: u8,
    pub dataset: String,
    pub normalization: String,
    pub tolerance_method: String,
    pub vigilance: f64,
    /// The vigilance as written in the table definition.
    pub vigilance_label: String,
    pub tuned: bool,
    pub clusters: Option<usize>,
    pub error_rate_percent: Option<f64>,
    pub epochs: Option<usize>,
    pub converged: Option<bool>,
    pub published_clusters: usize,
    pub published_error_rate_percent: f64,
    /// Reproduced minus published error rate.
    pub error_delta: Option<f64>,
    /// `ok`, or `skipped: <reason>`.
    pub status: String,
}

impl Tabular for BenchRow {
    fn headers() -> Vec<&'static str> {
        vec![
            "table",
            "dataset",
            "normalization",
            "tolerance_method",
            "vigilance",
            "clusters",
            "error_rate_percent",
            "epochs",
            "converged",
            "vigilance_label",
            "tuned",
            "published_clusters",
            "published_error_rate_percent",
            "error_delta",
            "status",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.table.to_string(),
            self.dataset.clone(),
            self.normalization.clone(),
            self.tolerance_method.clone(),
            self.vigilance.to_string(),
            fmt_opt(self.clusters),
            fmt_opt(self.error_rate_percent.map(round4)),
            fmt_opt(self.epochs),
            fmt_opt(self.converged),
            self.vigilance_label.clone(),
            self.tuned.to_string(),
            self.published_clusters.to_string(),
            self.published_error_rate_percent.to_string(),
            fmt_opt(self.error_delta.map(round4)),
            self.status.clone(),
        ]
    }
}

fn round4(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Where the benchmark gets its data.
#[derive(Debug, Clone, Copy)]
pub struct BenchSources<'a> {
    pub manifest: Option<&'a Manifest>,
    pub synth_seed: u64,
    pub max_epochs: usize,
}

fn load(name: &str, sources: &BenchSources<'_>) -> std::result::Result<Dataset, String> {
    if let Some(preset) = name.strip_prefix("synthetic-") {
        let id: u8 = preset
            .parse()
            .map_err(|_| format!("bad preset {preset:?}"))?;
        let spec = SynthSpec::preset(id, sources.synth_seed).map_err(|e| e.to_string())?;
        return generate(&spec).map_err(|e| e.to_string());
    }
    let manifest = sources.manifest.ok_or_else(|| "no manifest".to_owned())?;
    let entry = manifest
        .get(name)
        .ok_or_else(|| format!("{name} not in manifest"))?;
    entry.load().map_err(|e| e.to_string())
}

/// Runs every row of table `id`. Datasets that cannot be loaded give
/// skipped rows rather than an error.
pub fn run_table(id: u8, sources: &BenchSources<'_>) -> Result<Vec<BenchRow>> {
    let spec = table(id).ok_or_else(|| {
        Error::InvalidParam(format!("unknown table {id}; expected one of {TABLE_IDS:?}"))
    })?;
    let mut cache: BTreeMap<&str, std::result::Result<Dataset, String>> = BTreeMap::new();
    let mut out = Vec::with_capacity(spec.rows.len());

    for published in spec.rows {
        let vigilance: Vigilance = published.vigilance.parse()?;
        let mut row = BenchRow {
            table: id,
            dataset: published.dataset.to_owned(),
            normalization: spec.normalization.name().to_owned(),
            tolerance_method: spec.tolerance.name().to_owned(),
            vigilance: vigilance.value(),
            vigilance_label: published.vigilance.to_owned(),
            tuned: spec.is_synthetic(),
            clusters: None,
            error_rate_percent: None,
            epochs: None,
            converged: None,
            published_clusters: published.clusters,
            published_error_rate_percent: published.error_rate_percent,
            error_delta: None,
            status: "ok".to_owned(),
        };

        let data = cache
            .entry(published.dataset)
            .or_insert_with(|| load(published.dataset, sources));
        let ds = match data {
            Ok(ds) => ds,
            Err(reason) => {
                row.status = format!("skipped: {reason}");
                out.push(row);
                continue;
            }
        };

        let mut cfg = ExperimentConfig::new(spec.normalization, spec.tolerance, vigilance);
        cfg.max_epochs = sources.max_epochs;
        if spec.is_synthetic() {
            cfg = cfg.tuned(published.clusters);
        }
        let report = run_experiment(ds, &cfg)?;
        row.clusters = Some(report.clusters);
        row.error_rate_percent = report.error_rate_percent;
        row.epochs = Some(report.epochs);
        row.converged = Some(report.converged);
        row.error_delta = report
            .error_rate_percent
            .map(|e| e - published.error_rate_percent);
        out.push(row);
    }
    Ok(out)
}
