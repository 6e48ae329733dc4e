// SPDX-License-Identifier: Apache-2.0

//! `hqisweep` command-line interface.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration or validation
//! error, 3 incomplete data, 4 tool or endpoint configuration error.

mod error;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hqisweep::config::RunConfig;
use hqisweep::edaflow::EdaError;
use hqisweep::report::{self, Format, ReportInput, ReportKind};
use hqisweep::sweep::{execute, plan_jobs, ExecContext, ExecOptions, Store};
use hqisweep::taskset::{ingest_manifests, TaskSet};
use hqisweep::GoldenBaseline;

use error::CliError;

#[derive(Parser)]
#[command(name = "hqisweep", version, about = "Synthesis-in-the-loop evaluation and decoding sweeps for RTL generation")]
struct Cli {
    /// Log verbosity (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration file.
    #[arg(short, long, default_value = "hqisweep.toml")]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build the deduplicated, weighted task set from benchmark manifests.
    Ingest {
        #[command(flatten)]
        config: ConfigArg,
        /// Manifests to use instead of the configured ones.
        #[arg(long = "manifest")]
        manifests: Vec<PathBuf>,
        /// Output path instead of the configured task set path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute and cache golden baselines for every task.
    Baseline {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Run, resume or inspect the sweep.
    Sweep {
        #[command(subcommand)]
        action: SweepAction,
    },
    /// Emit one report over the result store.
    Report {
        #[arg(value_enum)]
        kind: KindArg,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
        /// Aggregate incomplete cells and flag them.
        #[arg(long)]
        allow_partial: bool,
        /// Metric for gaps, default-rank, spearman and distribution (repeatable).
        #[arg(long = "metric")]
        metrics: Vec<String>,
    },
}

#[derive(Subcommand)]
enum SweepAction {
    /// Execute every job not yet in the store.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Re-run jobs already in the store.
        #[arg(long)]
        force: bool,
        #[arg(long, hide = true)]
        halt_after: Option<usize>,
    },
    /// Continue an interrupted run.
    Resume {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, hide = true)]
        halt_after: Option<usize>,
    },
    /// Show progress against the plan.
    Status {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gaps,
    DefaultRank,
    Spearman,
    Pareto,
    Distribution,
    Correlation,
    Landscape,
    Categories,
    Efficiency,
}

impl From<KindArg> for ReportKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gaps => ReportKind::Gaps,
            KindArg::DefaultRank => ReportKind::DefaultRank,
            KindArg::Spearman => ReportKind::Spearman,
            KindArg::Pareto => ReportKind::Pareto,
            KindArg::Distribution => ReportKind::Distribution,
            KindArg::Correlation => ReportKind::Correlation,
            KindArg::Landscape => ReportKind::Landscape,
            KindArg::Categories => ReportKind::Categories,
            KindArg::Efficiency => ReportKind::Efficiency,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest { config, manifests, out } => ingest(&config.config, manifests, out),
        Command::Baseline { config } => baseline(&config.config),
        Command::Sweep { action } => match action {
            SweepAction::Run { config, force, halt_after } => sweep(&config.config, force, halt_after, false),
            SweepAction::Resume { config, halt_after } => sweep(&config.config, false, halt_after, true),
            SweepAction::Status { config } => status(&config.config),
        },
        Command::Report { kind, config, format, allow_partial, metrics } => {
            report(&config.config, kind.into(), format.into(), allow_partial, metrics)
        }
    }
}

fn load_taskset(cfg: &RunConfig) -> Result<TaskSet, CliError> {
    if !cfg.taskset.is_file() {
        return Err(CliError::validation(format!(
            "task set {} not found; run `hqisweep ingest` first",
            cfg.taskset.display()
        )));
    }
    Ok(TaskSet::load(&cfg.taskset)?)
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::other(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    std::fs::write(tmp.path(), text).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn ingest(config: &Path, manifests: Vec<PathBuf>, out: Option<PathBuf>) -> Result<(), CliError> {
    // Explicit manifests plus an output path need no configuration file.
    let (manifests, out) = match out {
        Some(out) if !manifests.is_empty() && !config.exists() => (manifests, out),
        out => {
            let cfg = RunConfig::load(config)?;
            let m = if manifests.is_empty() { cfg.benchmarks.clone() } else { manifests };
            (m, out.unwrap_or(cfg.taskset))
        }
    };
    if manifests.is_empty() {
        return Err(CliError::validation("no benchmark manifests given"));
    }
    for m in &manifests {
        if !m.is_file() {
            return Err(CliError::validation(format!("manifest {} does not exist", m.display())));
        }
    }
    let set = ingest_manifests(&manifests)?;
    write_atomic(&out, &set.to_json())?;

    println!("tasks: {}", set.len());
    for b in set.benchmarks() {
        println!("  {}: {}", b.name(), set.tasks_of(&b).count());
    }
    println!("aliases: {}", set.alias_map.len());
    for (dup, kept) in &set.alias_map {
        println!("  {dup} -> {kept}");
    }
    println!("weights:");
    for t in &set.tasks {
        println!("  {} [{}] {}", t.id, t.benchmark.name(), t.complexity_weight);
    }
    for (id, w) in &set.warnings {
        for msg in w {
            log::warn!("{id}: {msg}");
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

/// Baselines for every task, failing with all broken goldens at once.
fn compute_baselines(
    cfg: &RunConfig,
    set: &TaskSet,
    evaluator: &hqisweep::edaflow::Evaluator,
) -> Result<BTreeMap<String, GoldenBaseline>, CliError> {
    let cache = cfg.baseline_cache();
    let mut out = BTreeMap::new();
    let mut broken = Vec::new();
    for t in &set.tasks {
        match cache.get_or_compute(evaluator, t) {
            Ok(b) => {
                out.insert(t.id.clone(), b);
            }
            Err(EdaError::GoldenFailed { task_id, gates, detail }) => broken.push(format!("{task_id} ({gates}; {detail})")),
            Err(e) => return Err(e.into()),
        }
    }
    if !broken.is_empty() {
        return Err(CliError::validation(format!("golden designs fail evaluation: {}", broken.join(", "))));
    }
    Ok(out)
}

fn baseline(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let set = load_taskset(&cfg)?;
    let evaluator = cfg.build_evaluator()?;
    let baselines = compute_baselines(&cfg, &set, &evaluator)?;
    for (id, b) in &baselines {
        println!("{id}: area {} delay {} warnings {}", b.area_ref, b.delay_ref, b.warnings_ref);
    }
    println!("baselines: {} (tool invocations: {})", baselines.len(), evaluator.invocations());
    Ok(())
}

fn sweep(config: &Path, force: bool, halt_after: Option<usize>, resume: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    if resume && !cfg.store.exists() {
        return Err(CliError::validation(format!("no store at {} to resume", cfg.store.display())));
    }
    let set = load_taskset(&cfg)?;
    let grid = cfg.grid()?;
    let plan = plan_jobs(&cfg.models(), &set.benchmarks(), &set, &grid, cfg.samples_per_task)?;
    let generators = cfg.build_generators()?;
    let evaluator = cfg.build_evaluator()?;
    let baselines = compute_baselines(&cfg, &set, &evaluator)?;
    let mut store = Store::open(&cfg.store, cfg.seed)?;
    let ctx = ExecContext {
        generators,
        evaluator: &evaluator,
        tasks: set.tasks.iter().map(|t| (t.id.clone(), t)).collect(),
        baselines,
    };
    let options = ExecOptions {
        generation_workers: cfg.parallelism.generation,
        eval_workers: cfg.parallelism.evaluation,
        force,
        halt_after,
    };
    let s = execute(&plan, &ctx, &mut store, &options)?;
    println!(
        "planned {} executed {} skipped {} failed {}{}",
        s.planned,
        s.executed,
        s.skipped,
        s.failed,
        if s.halted { " (halted)" } else { "" }
    );
    Ok(())
}

fn status(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let set = load_taskset(&cfg)?;
    let plan = plan_jobs(&cfg.models(), &set.benchmarks(), &set, &cfg.grid()?, cfg.samples_per_task)?;
    let store = if cfg.store.exists() { Some(Store::open_read_only(&cfg.store)?) } else { None };
    let mut per: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
    let mut failed = 0;
    for k in &plan {
        let e = per.entry((k.model.clone(), k.benchmark.clone())).or_default();
        e.1 += 1;
        if let Some(r) = store.as_ref().and_then(|s| s.get(k)) {
            e.0 += 1;
            failed += usize::from(r.generation.failed());
        }
    }
    let done: usize = per.values().map(|v| v.0).sum();
    for ((m, b), (d, n)) in &per {
        println!("{m} {b}: {d}/{n}");
    }
    let pct = if plan.is_empty() { 100.0 } else { 100.0 * done as f64 / plan.len() as f64 };
    println!("complete: {done}/{} ({pct:.1}%), failed generations: {failed}", plan.len());
    Ok(())
}

fn report(config: &Path, kind: ReportKind, format: Format, allow_partial: bool, metrics: Vec<String>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let set = load_taskset(&cfg)?;
    let store = Store::open_read_only(&cfg.store)?;
    let input = ReportInput {
        store: &store,
        taskset: &set,
        models: cfg.models(),
        grid: cfg.grid()?,
        samples_per_task: cfg.samples_per_task,
        allow_partial,
        metrics,
    };
    print!("{}", report::render(kind, format, &input)?);
    Ok(())
}
