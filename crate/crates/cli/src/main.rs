//! `albench`: run active learning experiments, determine budgets and build
//! reports from run records.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a configuration
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};

use albench::acquisition::AlgorithmKind;
use albench::config::{resolve_source, run_config, DatasetConfig, ExperimentConfig, SourceConfig};
use albench::report::{emit_report, emit_variance, read_records, write_manifest, write_record};
use albench::rng::{stream_from, Seeds};
use albench::runner::{
    budget_from_curves, full_accuracy_reference, run_restarts, worker_pool, BudgetRule,
    FullAccuracyCache, RunCurve,
};
use albench::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "albench", version, about = "Single-sample pool-based active learning benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every (dataset, algorithm) pair of a config and write run records.
    Run(RunArgs),
    /// Determine the budget per dataset from pilot runs.
    Budget(BudgetArgs),
    /// Build score tables and plots from run records.
    Report(ReportArgs),
    /// Subset-median spread as a function of the number of restarts.
    Variance(VarianceArgs),
    /// List the datasets of a config.
    ListDatasets(ListArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output root.
    #[arg(long, env = "ALBENCH_OUT", default_value = "results")]
    out: PathBuf,
    /// Worker threads; defaults to the config value, 0 means all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Only these datasets (repeatable).
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    /// Only these algorithms (repeatable).
    #[arg(long = "algorithm")]
    algorithms: Vec<String>,
    /// Override the restart count.
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Override every dataset's budget.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[command(flatten)]
    common: Common,
    /// Use existing pilot records instead of running a pilot.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Fraction of full-dataset accuracy that ends the budget.
    #[arg(long)]
    target: Option<f64>,
    /// Minimum absolute gain over the trailing window.
    #[arg(long = "improve-eps")]
    improve_eps: Option<f64>,
    /// Trailing window as a fraction of the iterations so far.
    #[arg(long)]
    window: Option<f64>,
    /// Smallest trailing window in iterations.
    #[arg(long = "min-window")]
    min_window: Option<usize>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory of run records; defaults to `<out>/records`.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, env = "ALBENCH_OUT", default_value = "results")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VarianceArgs {
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, env = "ALBENCH_OUT", default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    dataset: String,
    #[arg(long)]
    algorithm: String,
    /// Subset sizes.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 5, 10, 20, 42, 50])]
    sizes: Vec<usize>,
    /// Subsets drawn per size.
    #[arg(long, default_value_t = 50)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ListArgs {
    #[arg(long)]
    config: PathBuf,
}

fn parse_algorithms(names: &[String]) -> Result<Vec<AlgorithmKind>> {
    names.iter().map(|n| n.parse()).collect()
}

struct Selected<'a> {
    cfg: &'a ExperimentConfig,
    datasets: Vec<&'a DatasetConfig>,
    algorithms: Vec<AlgorithmKind>,
    restarts: usize,
    workers: usize,
}

fn select<'a>(cfg: &'a ExperimentConfig, c: &Common) -> Result<Selected<'a>> {
    let datasets = if c.datasets.is_empty() {
        cfg.datasets.iter().collect()
    } else {
        c.datasets.iter().map(|n| cfg.dataset(n)).collect::<Result<Vec<_>>>()?
    };
    let algorithms = if c.algorithms.is_empty() {
        cfg.algorithms.clone()
    } else {
        parse_algorithms(&c.algorithms)?
    };
    let restarts = c.restarts.unwrap_or(cfg.restarts);
    if restarts == 0 {
        return Err(Error::config("--restarts must be at least 1"));
    }
    Ok(Selected {
        cfg,
        datasets,
        algorithms,
        restarts,
        workers: c.workers.unwrap_or(cfg.workers),
    })
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.common.config)?;
    let sel = select(&cfg, &args.common)?;
    let pool = worker_pool(sel.workers)?;
    let out = &args.common.out;
    let records = out.join("records");
    let mut files = Vec::new();
    let mut failure = None;
    'outer: for ds in &sel.datasets {
        let source = resolve_source(ds)?;
        let budget = args.budget.unwrap_or(ds.budget);
        for &alg in &sel.algorithms {
            info!("{}: {alg} x {} restarts, budget {budget}", ds.name, sel.restarts);
            let rc = run_config(sel.cfg, ds, source.clone(), alg, budget);
            match run_restarts(&rc, sel.cfg.base_seeds(), sel.restarts, &pool) {
                Ok(curves) => {
                    for c in &curves {
                        files.push(write_record(&records, c)?);
                    }
                }
                Err(e) => {
                    error!("{} / {alg}: {e}", ds.name);
                    failure = Some(e);
                    break 'outer;
                }
            }
        }
    }
    let mut resolved = cfg.resolved_json();
    resolved["restarts"] = sel.restarts.into();
    write_manifest(out, "run", resolved, &files)?;
    println!("wrote {} run records under {}", files.len(), records.display());
    failure.map_or(Ok(()), Err)
}

fn cmd_budget(args: &BudgetArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.common.config)?;
    let sel = select(&cfg, &args.common)?;
    let defaults = cfg.budget_rule;
    let rule = BudgetRule {
        target: args.target.unwrap_or(defaults.target),
        improve_eps: args.improve_eps.unwrap_or(defaults.improve_eps),
        window: args.window.unwrap_or(defaults.window),
        min_window: args.min_window.unwrap_or(defaults.min_window),
    };
    let pool = worker_pool(sel.workers)?;
    let recorded = match &args.records {
        Some(dir) => Some(read_records(dir)?),
        None => None,
    };
    let cache = FullAccuracyCache::new();
    println!("dataset\tbudget\tfull_accuracy\tpilot_length");
    for ds in &sel.datasets {
        let source = resolve_source(ds)?;
        let pilot = ds.pilot_budget();
        let curves: Vec<RunCurve> = match &recorded {
            Some(all) => all.iter().filter(|c| c.dataset == ds.name).cloned().collect(),
            None => {
                let mut v = Vec::new();
                for &alg in sel.algorithms.iter().filter(|&&a| a != AlgorithmKind::Oracle) {
                    info!("{}: pilot {alg} x {} restarts, length {pilot}", ds.name, sel.restarts);
                    let rc = run_config(sel.cfg, ds, source.clone(), alg, pilot);
                    v.extend(run_restarts(&rc, sel.cfg.base_seeds(), sel.restarts, &pool)?);
                }
                v
            }
        };
        let non_oracle: Vec<&RunCurve> = curves.iter().filter(|c| c.algorithm != AlgorithmKind::Oracle).collect();
        if non_oracle.is_empty() {
            return Err(Error::Invalid(format!(
                "{}: no non-oracle pilot runs; oracle runs are excluded from the budget rules",
                ds.name
            )));
        }
        let seeds: Vec<Seeds> = {
            let mut s: Vec<Seeds> = non_oracle.iter().map(|c| c.seeds).collect();
            s.sort_by_key(|s| (s.omega, s.data, s.model));
            s.dedup();
            s
        };
        let rc = run_config(sel.cfg, ds, source, AlgorithmKind::Random, pilot);
        let full = full_accuracy_reference(&rc, &seeds, &cache)?;
        let b = budget_from_curves(&curves, full, &rule)?;
        let len = non_oracle.iter().map(|c| c.len()).min().unwrap_or(0);
        println!("{}\t{b}\t{full}\t{len}", ds.name);
    }
    Ok(())
}

fn records_dir(records: &Option<PathBuf>, out: &Path) -> PathBuf {
    records.clone().unwrap_or_else(|| out.join("records"))
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let dir = records_dir(&args.records, &args.out);
    let curves = read_records(&dir)?;
    if curves.is_empty() {
        return Err(Error::Invalid(format!("no run records under {}", dir.display())));
    }
    let files = emit_report(&curves, &args.out)?;
    let cfg = serde_json::json!({ "records": dir.display().to_string(), "runs": curves.len() });
    write_manifest(&args.out, "report", cfg, &files)?;
    println!("wrote {} report files under {}", files.len(), args.out.display());
    Ok(())
}

fn cmd_variance(args: &VarianceArgs) -> Result<()> {
    let dir = records_dir(&args.records, &args.out);
    let curves = read_records(&dir)?;
    let alg: AlgorithmKind = args.algorithm.parse()?;
    let mut rng = stream_from(args.seed, "variance");
    let (result, files) = emit_variance(&curves, &args.dataset, alg, &args.sizes, args.draws, &mut rng, &args.out)?;
    println!("size\tq1\tmedian\tq3\tiqr");
    for s in &result {
        println!("{}\t{}\t{}\t{}\t{}", s.size, s.stats.q1, s.stats.median, s.stats.q3, s.stats.iqr());
    }
    let cfg = serde_json::json!({
        "records": dir.display().to_string(),
        "dataset": args.dataset,
        "algorithm": alg.name(),
        "sizes": args.sizes,
        "draws": args.draws,
        "seed": args.seed,
    });
    write_manifest(&args.out, "variance", cfg, &files)?;
    Ok(())
}

fn cmd_list(args: &ListArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&args.config)?;
    println!("name\tdomain\tsource\tbudget\tpilot_budget");
    for ds in &cfg.datasets {
        let kind = match &ds.source {
            SourceConfig::ThreeClust(_) => "three-clust",
            SourceConfig::DivergingSin(_) => "diverging-sin",
            SourceConfig::Tabular(_) => "tabular",
        };
        println!("{}\t{}\t{kind}\t{}\t{}", ds.name, ds.domain, ds.budget, ds.pilot_budget());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Budget(a) => cmd_budget(a),
        Command::Report(a) => cmd_report(a),
        Command::Variance(a) => cmd_variance(a),
        Command::ListDatasets(a) => cmd_list(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_config() => {
            error!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            if matches!(e, Error::Io { .. }) {
                warn!("check that the path exists and is writable");
            }
            error!("{e}");
            ExitCode::from(1)
        }
    }
}
