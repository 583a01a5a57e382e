use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kflann_core::report::{self, to_json};
use kflann_core::synth::{DEFAULT_SEED, PRESETS};
use kflann_core::tables::{table, BenchSources};
use kflann_core::{
    compute_tolerance, fit_stats, generate, linear_grid, load_csv, normalize, run_experiment,
    run_table, save_csv, tune_tolerance, vigilance_sweep, write_csv, Dataset, ExperimentConfig,
    KflannParams, LabelColumn, Manifest, Normalization, ReportFormat, SeedPolicy, SynthSpec,
    ToleranceMethod, TuningRule, Vigilance, DEFAULT_MAX_EPOCHS, DEFAULT_MAX_ITERS, TABLE_IDS,
};

const DEFAULT_MANIFEST: &str = "data/manifest.toml";

/// KFLANN clustering experiments and benchmark tables.
#[derive(Parser)]
#[command(name = "kflann", version, about)]
struct Cli {
    /// Dataset manifest (TOML). Falls back to ./data/manifest.toml.
    #[arg(long, env = "KFLANN_MANIFEST", global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize, set tolerance, optionally tune, fit and score one dataset.
    Run(RunArgs),
    /// Search for a tolerance that yields the expected cluster count.
    Tune(TuneArgs),
    /// Fit once per vigilance value and emit rho, clusters, error rows.
    Sweep(SweepArgs),
    /// Reproduce the published result tables.
    Bench(BenchArgs),
    /// Write synthetic datasets as CSV.
    Synth(SynthArgs),
    /// Summarize a dataset, or every manifest dataset.
    Describe(DescribeArgs),
}

#[derive(Args)]
#[group(id = "source", multiple = false)]
struct DataArgs {
    /// CSV file, headerless or with a header row.
    #[arg(long, group = "source")]
    data: Option<PathBuf>,
    /// Dataset name from the manifest.
    #[arg(long, group = "source")]
    dataset: Option<String>,
    /// Synthetic preset (1-6).
    #[arg(long, group = "source")]
    synth: Option<u8>,
    /// The last CSV column is the class label.
    #[arg(long)]
    labeled: bool,
    /// 1-based class label column (implies --labeled).
    #[arg(long)]
    label_column: Option<usize>,
    /// Seed for synthetic data.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct PrepArgs {
    /// none, zscore, zscore-pattern or minmax.
    #[arg(long, default_value = "none")]
    normalize: Normalization,
    /// Lower bound of the min-max target range.
    #[arg(long, default_value_t = 0.0)]
    new_min: f64,
    /// Upper bound of the min-max target range.
    #[arg(long, default_value_t = 1.0)]
    new_max: f64,
    /// stddev, maxmin or manual.
    #[arg(long, default_value = "maxmin")]
    tolerance: ToleranceMethod,
    /// Comma-separated per-feature tolerances (implies --tolerance manual).
    #[arg(long, value_delimiter = ',')]
    tolerance_values: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_MAX_EPOCHS)]
    max_epochs: usize,
    /// anchored or rebuild.
    #[arg(long, default_value = "anchored")]
    seed_policy: SeedPolicy,
}

impl PrepArgs {
    fn normalization(&self) -> Normalization {
        match self.normalize {
            Normalization::MinMax { .. } => Normalization::MinMax {
                new_min: self.new_min,
                new_max: self.new_max,
            },
            other => other,
        }
    }

    fn tolerance_method(&self) -> ToleranceMethod {
        if self.tolerance_values.is_some() {
            ToleranceMethod::Manual
        } else {
            self.tolerance
        }
    }
}

#[derive(Args)]
struct TuneOpts {
    /// Target cluster count; defaults to the dataset's expected count.
    #[arg(long)]
    expected_clusters: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// bisect or literal.
    #[arg(long, default_value = "bisect")]
    tuning_rule: TuningRule,
}

#[derive(Args)]
struct OutputArgs {
    /// json, csv or md.
    #[arg(long)]
    format: Option<ReportFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    prep: PrepArgs,
    /// Decimal or ratio of feature counts, e.g. 0.75 or 18/34.
    #[arg(long)]
    vigilance: Vigilance,
    /// Tune the tolerance before fitting.
    #[arg(long)]
    tune: bool,
    #[command(flatten)]
    tuning: TuneOpts,
    /// Write per-pattern cluster assignments as CSV.
    #[arg(long)]
    assignments: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    prep: PrepArgs,
    #[arg(long)]
    vigilance: Vigilance,
    #[command(flatten)]
    tuning: TuneOpts,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    prep: PrepArgs,
    /// start:step:end, e.g. 0:0.1:1.
    #[arg(long, conflicts_with = "rho")]
    grid: Option<String>,
    /// Explicit comma-separated vigilance values (decimals or ratios).
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<Vigilance>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Table to reproduce (3-9); repeatable. Defaults to all.
    #[arg(long = "table", value_parser = clap::value_parser!(u8).range(3..=9))]
    tables: Vec<u8>,
    /// Seed for the synthetic table.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_EPOCHS)]
    max_epochs: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Preset to generate; omit with --out-dir to write all six.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    preset: Option<u8>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file for a single preset (stdout when absent).
    #[arg(long, short, conflicts_with = "out_dir")]
    output: Option<PathBuf>,
    /// Directory receiving synthetic-<id>.csv files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DescribeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let manifest_path = cli.manifest.clone();
    let manifest = || load_manifest(manifest_path.as_deref());
    match cli.command {
        Command::Run(args) => cmd_run(args, manifest),
        Command::Tune(args) => cmd_tune(args, manifest),
        Command::Sweep(args) => cmd_sweep(args, manifest),
        Command::Bench(args) => cmd_bench(args, manifest_path.as_deref()),
        Command::Synth(args) => cmd_synth(args),
        Command::Describe(args) => cmd_describe(args, manifest),
    }
}

fn load_manifest(path: Option<&Path>) -> Result<Manifest> {
    let path = path.unwrap_or(Path::new(DEFAULT_MANIFEST));
    Manifest::load(path).with_context(|| format!("loading manifest {}", path.display()))
}

fn load_data(args: &DataArgs, manifest: impl FnOnce() -> Result<Manifest>) -> Result<Dataset> {
    if let Some(path) = &args.data {
        let label = match (args.label_column, args.labeled) {
            (Some(0), _) => bail!("--label-column is 1-based"),
            (Some(c), _) => Some(LabelColumn::Index(c - 1)),
            (None, true) => Some(LabelColumn::Last),
            (None, false) => None,
        };
        return load_csv(path, label).with_context(|| format!("loading {}", path.display()));
    }
    if let Some(name) = &args.dataset {
        let manifest = manifest()?;
        let entry = manifest
            .get(name)
            .with_context(|| format!("dataset {name:?} is not in the manifest"))?;
        return entry
            .load()
            .with_context(|| format!("loading dataset {name:?}"));
    }
    if let Some(preset) = args.synth {
        let spec = SynthSpec::preset(preset, args.seed)?;
        return Ok(generate(&spec)?);
    }
    bail!("one of --data, --dataset or --synth is required")
}

fn synth_seed(args: &DataArgs) -> Option<u64> {
    args.synth.map(|_| args.seed)
}

fn expected_for(opts: &TuneOpts, ds: &Dataset) -> Result<usize> {
    opts.expected_clusters
        .or(ds.expected_clusters())
        .with_context(|| format!("{}: --expected-clusters is required for tuning", ds.name()))
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn cmd_run(args: RunArgs, manifest: impl FnOnce() -> Result<Manifest>) -> Result<()> {
    let ds = load_data(&args.data, manifest)?;
    let mut cfg = ExperimentConfig::new(
        args.prep.normalization(),
        args.prep.tolerance_method(),
        args.vigilance,
    );
    cfg.manual_tolerance = args.prep.tolerance_values.clone();
    cfg.max_epochs = args.prep.max_epochs;
    cfg.seed_policy = args.prep.seed_policy;
    cfg.max_iters = args.tuning.max_iters;
    cfg.tuning_rule = args.tuning.tuning_rule;
    if args.tune {
        cfg = cfg.tuned(expected_for(&args.tuning, &ds)?);
    } else if args.tuning.expected_clusters.is_some() {
        bail!("--expected-clusters only applies with --tune");
    }

    let start = Instant::now();
    let mut report = run_experiment(&ds, &cfg).with_context(|| format!("running {}", ds.name()))?;
    report.seed = synth_seed(&args.data);
    eprintln!(
        "{}: {} clusters, {} epochs{} in {:.3}s",
        ds.name(),
        report.clusters,
        report.epochs,
        if report.converged {
            ""
        } else {
            " (not converged)"
        },
        start.elapsed().as_secs_f64()
    );
    if let Some(trace) = &report.tuning {
        if !trace.reached {
            eprintln!(
                "warning: tuning did not reach {} clusters in {} iterations",
                trace.expected,
                trace.steps.len()
            );
        }
    }
    if let Some(path) = &args.assignments {
        fs::write(path, report.assignments_csv()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(
        &args.out,
        &report.render(args.out.format.unwrap_or_default())?,
    )
}

fn cmd_tune(args: TuneArgs, manifest: impl FnOnce() -> Result<Manifest>) -> Result<()> {
    let ds = load_data(&args.data, manifest)?;
    let data = normalize(&ds, args.prep.normalization())?;
    let stats = fit_stats(&data);
    let start = compute_tolerance(
        args.prep.tolerance_method(),
        &stats,
        args.prep.tolerance_values.as_deref(),
    )?;
    let params = KflannParams::new(args.vigilance, start).with_max_epochs(args.prep.max_epochs);
    let expected = expected_for(&args.tuning, &ds)?;
    let out = tune_tolerance(
        &data,
        &params,
        expected,
        args.tuning.max_iters,
        args.tuning.tuning_rule,
    )?;
    eprintln!(
        "{}: {} after {} iterations (counts {:?})",
        ds.name(),
        if out.trace.reached {
            "reached"
        } else {
            "did not reach"
        },
        out.trace.steps.len(),
        out.trace.cluster_counts()
    );

    let text = match args.out.format.unwrap_or_default() {
        ReportFormat::Json => to_json(&out)?,
        ReportFormat::Csv => {
            let mut s = String::from("iteration,clusters,direction,delta\n");
            for step in &out.trace.steps {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    step.iteration,
                    step.clusters,
                    direction_name(step.direction),
                    join(&step.delta, ";")
                ));
            }
            s
        }
        ReportFormat::Md => {
            let mut s =
                String::from("| iteration | clusters | direction | delta |\n|---|---|---|---|\n");
            for step in &out.trace.steps {
                s.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    step.iteration,
                    step.clusters,
                    direction_name(step.direction),
                    join(&step.delta, ", ")
                ));
            }
            s
        }
    };
    emit(&args.out, &text)
}

fn direction_name(d: Option<kflann_core::TuningDirection>) -> &'static str {
    match d {
        None => "reached",
        Some(kflann_core::TuningDirection::DownTowardMin) => "down",
        Some(kflann_core::TuningDirection::UpTowardMax) => "up",
    }
}

fn join(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, step, end] = parts.as_slice() else {
        bail!("grid must be start:step:end, got {spec:?}");
    };
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .with_context(|| format!("bad grid value {s:?}"))
    };
    Ok(linear_grid(num(start)?, num(step)?, num(end)?)?)
}

fn cmd_sweep(args: SweepArgs, manifest: impl FnOnce() -> Result<Manifest>) -> Result<()> {
    let ds = load_data(&args.data, manifest)?;
    let grid = match (&args.grid, &args.rho) {
        (_, Some(rho)) => rho.iter().map(|v| v.value()).collect(),
        (Some(g), None) => parse_grid(g)?,
        (None, None) => parse_grid("0:0.1:1")?,
    };
    let data = normalize(&ds, args.prep.normalization())?;
    let delta = compute_tolerance(
        args.prep.tolerance_method(),
        &fit_stats(&data),
        args.prep.tolerance_values.as_deref(),
    )?;
    let result = vigilance_sweep(&data, &delta, &grid, args.prep.max_epochs)?;
    eprintln!("{}: {} grid points", ds.name(), result.points.len());
    let text = match args.out.format.unwrap_or(ReportFormat::Csv) {
        ReportFormat::Json => to_json(&result)?,
        ReportFormat::Csv => result.to_csv(),
        ReportFormat::Md => {
            let mut s = String::from("| rho | clusters | error_rate_percent |\n|---|---|---|\n");
            for p in &result.points {
                s.push_str(&format!(
                    "| {} | {} | {} |\n",
                    p.vigilance,
                    p.clusters,
                    report::fmt_opt(p.error_rate_percent)
                ));
            }
            s
        }
    };
    emit(&args.out, &text)
}

fn cmd_bench(args: BenchArgs, manifest_path: Option<&Path>) -> Result<()> {
    let manifest = match load_manifest(manifest_path) {
        Ok(m) => Some(m),
        Err(err) => {
            eprintln!("warning: {err:#}; dataset rows will be skipped");
            None
        }
    };
    let sources = BenchSources {
        manifest: manifest.as_ref(),
        synth_seed: args.seed,
        max_epochs: args.max_epochs,
    };
    let ids = if args.tables.is_empty() {
        TABLE_IDS.to_vec()
    } else {
        args.tables.clone()
    };

    let start = Instant::now();
    let mut per_table = Vec::new();
    for id in ids {
        let rows = run_table(id, &sources).with_context(|| format!("table {id}"))?;
        let skipped = rows.iter().filter(|r| r.status != "ok").count();
        eprintln!("table {id}: {} rows, {skipped} skipped", rows.len());
        per_table.push((id, rows));
    }
    eprintln!("bench finished in {:.2}s", start.elapsed().as_secs_f64());

    let format = args.out.format.unwrap_or_default();
    let text = match format {
        ReportFormat::Md => per_table
            .iter()
            .map(|(id, rows)| {
                let title = table(*id).map(|t| t.title).unwrap_or_default();
                format!("## Table {id}: {title}\n\n{}", report::to_markdown(rows))
            })
            .collect::<Vec<_>>()
            .join("\n"),
        _ => {
            let all: Vec<_> = per_table.into_iter().flat_map(|(_, rows)| rows).collect();
            report::render(&all, format)?
        }
    };
    emit(&args.out, &text)
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    match (&args.out_dir, args.preset) {
        (Some(dir), presets) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let ids = presets.map_or(PRESETS.to_vec(), |p| vec![p]);
            for id in ids {
                let ds = generate(&SynthSpec::preset(id, args.seed)?)?;
                let path = dir.join(format!("{}.csv", ds.name()));
                save_csv(&ds, &path).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {} ({} patterns)", path.display(), ds.len());
            }
            Ok(())
        }
        (None, Some(id)) => {
            let ds = generate(&SynthSpec::preset(id, args.seed)?)?;
            match &args.output {
                Some(path) => {
                    save_csv(&ds, path).with_context(|| format!("writing {}", path.display()))?
                }
                None => {
                    let stdout = std::io::stdout().lock();
                    write_csv(&ds, stdout)?;
                }
            }
            Ok(())
        }
        (None, None) => bail!("--preset is required unless --out-dir is given"),
    }
}

fn cmd_describe(args: DescribeArgs, manifest: impl FnOnce() -> Result<Manifest>) -> Result<()> {
    let has_source =
        args.data.data.is_some() || args.data.dataset.is_some() || args.data.synth.is_some();
    let summaries = if has_source {
        vec![load_data(&args.data, manifest)?.describe()]
    } else {
        let manifest = manifest()?;
        manifest
            .entries()
            .iter()
            .map(|e| {
                e.load()
                    .map(|ds| ds.describe())
                    .with_context(|| format!("loading {}", e.name))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let text = if args.json {
        to_json(&summaries)?
    } else {
        summaries.iter().map(|s| format!("{s}\n")).collect()
    };
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    Ok(())
}
