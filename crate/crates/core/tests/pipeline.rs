use std::path::PathBuf;

use kflann_core::synth::DEFAULT_SEED;
use kflann_core::{
    generate, run_experiment, run_table, BenchSources, Dataset, ExperimentConfig, Manifest,
    Normalization, ReportFormat, SynthSpec, ToleranceMethod, TuningRule, Vigilance, TABLE_IDS,
};

fn manifest() -> Manifest {
    Manifest::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/manifest.toml"))
        .unwrap()
}

fn load(name: &str) -> Dataset {
    manifest().get(name).unwrap().load().unwrap()
}

fn config(rho: &str) -> ExperimentConfig {
    ExperimentConfig::new(
        Normalization::None,
        ToleranceMethod::Maxmin,
        rho.parse().unwrap(),
    )
}

#[test]
fn manifest_shapes_match_declared() {
    let m = manifest();
    assert_eq!(m.entries().len(), 8);
    for entry in m.entries() {
        let ds = entry.load().unwrap();
        assert_eq!(ds.n(), entry.n, "{}", entry.name);
        assert!(ds.is_labeled());
    }
}

#[test]
fn iris_report_is_reproducible() {
    let ds = load("iris");
    let a = run_experiment(&ds, &config("1")).unwrap();
    let b = run_experiment(&ds, &config("1")).unwrap();
    for format in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Md] {
        assert_eq!(a.render(format).unwrap(), b.render(format).unwrap());
    }
    assert_eq!(a.clusters, 3);
    assert!(a.converged);
}

#[test]
fn json_report_round_trips_key_fields() {
    let ds = load("iris");
    let report = run_experiment(&ds, &config("3/4")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&report.render(ReportFormat::Json).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["dataset"], "iris");
    assert_eq!(json["clusters"], report.clusters);
    assert_eq!(json["vigilance"], 0.75);
    assert_eq!(json["assignments"].as_array().unwrap().len(), 150);
}

#[test]
fn fraction_and_decimal_vigilance_agree() {
    let ds = load("wine");
    let a = run_experiment(&ds, &config("10/13")).unwrap();
    let b = run_experiment(&ds, &config(&(10.0 / 13.0).to_string())).unwrap();
    assert_eq!(a.assignments, b.assignments);
}

#[test]
fn literal_tuning_on_new_thyroid_terminates() {
    let ds = load("new_thyroid");
    let mut cfg = config("1").tuned(3);
    cfg.tuning_rule = TuningRule::Literal;
    cfg.max_iters = 20;
    let report = run_experiment(&ds, &cfg).unwrap();
    let trace = report.tuning.unwrap();
    assert!(trace.steps.len() <= 20);
    assert!(!trace.steps.is_empty());
}

#[test]
fn every_table_produces_rows() {
    let m = manifest();
    let sources = BenchSources {
        manifest: Some(&m),
        synth_seed: DEFAULT_SEED,
        max_epochs: 100,
    };
    for id in TABLE_IDS {
        let rows = run_table(id, &sources).unwrap();
        assert!(!rows.is_empty(), "table {id}");
        assert!(rows.iter().all(|r| r.status == "ok"), "table {id}");
    }
}

#[test]
fn synthetic_sets_are_seed_stable() {
    let a = generate(&SynthSpec::preset(3, DEFAULT_SEED).unwrap()).unwrap();
    let b = generate(&SynthSpec::preset(3, DEFAULT_SEED).unwrap()).unwrap();
    let c = generate(&SynthSpec::preset(3, DEFAULT_SEED + 1).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn vigilance_rejects_out_of_range() {
    assert!("5/4".parse::<Vigilance>().is_err());
    assert!("-0.1".parse::<Vigilance>().is_err());
    assert!("1/0".parse::<Vigilance>().is_err());
}
