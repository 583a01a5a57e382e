//! Fixtures shared by the criterion benchmarks.

use std::path::PathBuf;

use kflann_core::{generate, Dataset, Manifest, SynthSpec};

/// The repository's `data/` directory.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// A manifest dataset by name, or `None` when the file is absent.
pub fn manifest_dataset(name: &str) -> Option<Dataset> {
    let manifest = Manifest::load(data_dir().join("manifest.toml")).ok()?;
    manifest.get(name)?.load().ok()
}

pub fn synthetic(preset: u8) -> Dataset {
    generate(&SynthSpec::preset(preset, kflann_core::synth::DEFAULT_SEED).expect("valid preset"))
        .expect("preset generates")
}
