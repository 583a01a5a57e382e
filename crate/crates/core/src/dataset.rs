//! Numeric datasets: CSV ingestion, validation, summaries and the dataset manifest.
//!
//! A [`Dataset`] is an ordered list of [`Pattern`]s. Order is significant:
//! the network is sensitive to presentation order, so loaders preserve file
//! order and transformations never reorder patterns.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One feature vector with an optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub features: Vec<f64>,
    pub label: Option<String>,
}

impl Pattern {
    pub fn new(features: Vec<f64>) -> Self {
        Self {
            features,
            label: None,
        }
    }

    pub fn labeled(features: Vec<f64>, label: impl Into<String>) -> Self {
        Self {
            features,
            label: Some(label.into()),
        }
    }
}

/// An immutable, validated collection of patterns sharing a feature count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n: usize,
    patterns: Vec<Pattern>,
    expected_clusters: Option<usize>,
}

impl Dataset {
    /// Builds a dataset, checking that it is non-empty, rectangular, finite,
    /// and either fully labeled or fully unlabeled.
    pub fn new(name: impl Into<String>, patterns: Vec<Pattern>) -> Result<Self> {
        let first = patterns.first().ok_or(Error::Empty)?;
        let n = first.features.len();
        if n == 0 {
            return Err(Error::InvalidParam(
                "patterns must have at least one feature".into(),
            ));
        }
        let labeled = first.label.is_some();
        for (row, p) in patterns.iter().enumerate() {
            if p.features.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.features.len(),
                });
            }
            if let Some(column) = p.features.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row: row + 1,
                    column: column + 1,
                });
            }
            if p.label.is_some() != labeled {
                return Err(Error::InvalidParam(format!(
                    "pattern {} breaks the all-or-none labeling rule",
                    row + 1
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            patterns,
            expected_clusters: None,
        })
    }

    /// Builds an unlabeled dataset from raw rows.
    pub fn from_rows(name: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(name, rows.into_iter().map(Pattern::new).collect())
    }

    pub fn with_expected_clusters(mut self, k: usize) -> Self {
        self.expected_clusters = Some(k);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Feature count.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.patterns[i].features
    }

    pub fn is_labeled(&self) -> bool {
        self.patterns[0].label.is_some()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.patterns[i].label.as_deref()
    }

    pub fn expected_clusters(&self) -> Option<usize> {
        self.expected_clusters
    }

    /// Values of feature `d` across all patterns, in order.
    pub fn column(&self, d: usize) -> impl Iterator<Item = f64> + '_ {
        self.patterns.iter().map(move |p| p.features[d])
    }

    /// Distinct labels in order of first appearance.
    pub fn classes(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for p in &self.patterns {
            if let Some(l) = p.label.as_deref() {
                if !seen.contains(&l) {
                    seen.push(l);
                }
            }
        }
        seen
    }

    /// Returns a copy with every feature vector replaced by `f(index, features)`.
    /// Labels, name and order are kept.
    pub(crate) fn map_features<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64]) -> Vec<f64>,
    {
        let patterns = self
            .patterns
            .iter()
            .enumerate()
            .map(|(i, p)| Pattern {
                features: f(i, &p.features),
                label: p.label.clone(),
            })
            .collect();
        let mut out = Dataset::new(self.name.clone(), patterns)?;
        out.expected_clusters = self.expected_clusters;
        Ok(out)
    }

    pub fn describe(&self) -> DatasetSummary {
        describe(self)
    }
}

/// Which column of a CSV file carries the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Index(usize),
}

/// Loads a comma-separated file.
///
/// With `label_column = None` every column is a feature. A leading header
/// row is skipped when none of its feature cells parses as a number. Row and
/// column numbers in errors are 1-based file positions.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<LabelColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_csv(&name, text.as_bytes(), label_column)
}

/// Parses CSV content from any reader; see [`load_csv`].
pub fn parse_csv<R: std::io::Read>(
    name: &str,
    reader: R,
    label_column: Option<LabelColumn>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width = None;
    let mut label_idx = None;
    let mut patterns = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Ragged {
                row,
                found: record.len(),
                expected,
            });
        }
        let lc = *label_idx.get_or_insert(match label_column {
            None => None,
            Some(LabelColumn::Last) => Some(expected - 1),
            Some(LabelColumn::Index(c)) => Some(c),
        });
        if let Some(c) = lc {
            if c >= expected {
                return Err(Error::InvalidParam(format!(
                    "label column {} out of range for {expected} columns",
                    c + 1
                )));
            }
        }

        let feature_cells = record.iter().enumerate().filter(|(c, _)| Some(*c) != lc);
        if patterns.is_empty()
            && feature_cells
                .clone()
                .all(|(_, v)| v.parse::<f64>().is_err())
        {
            // header row
            continue;
        }
        let mut features = Vec::with_capacity(expected);
        for (c, v) in feature_cells {
            let x: f64 = v.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                value: v.to_string(),
            })?;
            if !x.is_finite() {
                return Err(Error::NonFinite { row, column: c + 1 });
            }
            features.push(x);
        }
        let label = lc.map(|c| record[c].to_string());
        patterns.push(Pattern { features, label });
    }
    if patterns.is_empty() {
        return Err(Error::Empty);
    }
    Dataset::new(name, patterns)
}

/// Writes a dataset as headerless CSV, label last when present.
///
/// Values use Rust's shortest round-trip float formatting, so reloading
/// reproduces every feature bit-exactly.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for p in ds.patterns() {
        let mut row: Vec<String> = p.features.iter().map(|v| v.to_string()).collect();
        if let Some(l) = &p.label {
            row.push(l.clone());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<writer>"),
        source,
    })?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(ds, std::io::BufWriter::new(file))
}

/// Pattern count, feature count and (for labeled data) the class histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub patterns: usize,
    pub n: usize,
    /// `(label, count)` in order of first appearance; `None` when unlabeled.
    pub classes: Option<Vec<(String, usize)>>,
}

pub fn describe(ds: &Dataset) -> DatasetSummary {
    let classes = ds.is_labeled().then(|| {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for p in ds.patterns() {
            let l = p.label.as_deref().unwrap_or_default();
            match counts.iter_mut().find(|(k, _)| k == l) {
                Some((_, c)) => *c += 1,
                None => counts.push((l.to_string(), 1)),
            }
        }
        counts
    });
    DatasetSummary {
        name: ds.name().to_string(),
        patterns: ds.len(),
        n: ds.n(),
        classes,
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} patterns, n={}", self.name, self.patterns, self.n)?;
        if let Some(classes) = &self.classes {
            let parts: Vec<String> = classes.iter().map(|(k, c)| format!("{k}:{c}")).collect();
            write!(f, ", classes {{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}

/// One dataset listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifestEntry {
    pub name: String,
    /// Relative paths resolve against the manifest's directory.
    pub path: PathBuf,
    pub n: usize,
    pub expected_clusters: usize,
    #[serde(default)]
    pub class_counts: Vec<usize>,
    #[serde(default = "default_true")]
    pub labeled: bool,
}

fn default_true() -> bool {
    true
}

impl DatasetManifestEntry {
    /// Loads the file and checks it against the declared shape.
    pub fn load(&self) -> Result<Dataset> {
        let label = self.labeled.then_some(LabelColumn::Last);
        let ds = load_csv(&self.path, label)?;
        if ds.n() != self.n {
            return Err(Error::Manifest(format!(
                "{}: declared n={} but file has {} features",
                self.name,
                self.n,
                ds.n()
            )));
        }
        if !self.class_counts.is_empty() {
            let total: usize = self.class_counts.iter().sum();
            if total != ds.len() {
                return Err(Error::Manifest(format!(
                    "{}: class counts sum to {total} but file has {} patterns",
                    self.name,
                    ds.len()
                )));
            }
        }
        let mut ds = ds.with_expected_clusters(self.expected_clusters);
        ds.name = self.name.clone();
        Ok(ds)
    }
}

#[derive(Debug, Deserialize)]
struct ManifestFile {
    #[serde(default, rename = "dataset")]
    datasets: Vec<DatasetManifestEntry>,
}

/// A list of named datasets with their expected cluster counts.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    entries: Vec<DatasetManifestEntry>,
    index: HashMap<String, usize>,
}

impl Manifest {
    pub fn from_entries(entries: Vec<DatasetManifestEntry>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.expected_clusters == 0 {
                return Err(Error::Manifest(format!(
                    "{}: expected_clusters must be >= 1",
                    e.name
                )));
            }
            if e.n == 0 {
                return Err(Error::Manifest(format!("{}: n must be >= 1", e.name)));
            }
            if index.insert(e.name.clone(), i).is_some() {
                return Err(Error::Manifest(format!("duplicate dataset {:?}", e.name)));
            }
        }
        Ok(Self { entries, index })
    }

    /// Parses TOML text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let file: ManifestFile =
            toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        let entries = file
            .datasets
            .into_iter()
            .map(|mut e| {
                if e.path.is_relative() {
                    e.path = base.join(&e.path);
                }
                e
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn entries(&self) -> &[DatasetManifestEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&DatasetManifestEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }
}
