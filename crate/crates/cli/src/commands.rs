//! Command-line surface: argument parsing and the four subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use zoqn::problems::Problem;
use zoqn::solver::{default_grid, run_baseline, run_fd_lbfgs, tune_baseline, RunRecord, TuneResult};

use crate::aggregate::{aggregate, linear_grid, to_csv as aggregate_csv};
use crate::cache::{cache_dir, reference_optimum};
use crate::config::{ExperimentConfig, Method, NoiseKind};
use crate::criteria::{full_suite, quick_suite};
use crate::error::{CliError, CliResult};
use crate::trace::{write_trace, Format};

#[derive(Debug, Parser)]
#[command(name = "zoqn", version, about = "Derivative-free L-BFGS with adaptive sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method over several seeds and write traces plus an aggregate.
    Run(ExperimentArgs),
    /// Tune a baseline step size over the power-of-two grid.
    TuneBaseline(ExperimentArgs),
    /// Compute (or load from cache) the reference optimum of a problem.
    Reference(ExperimentArgs),
    /// Run the acceptance checks.
    Verify {
        /// Include the long benchmark comparisons.
        #[arg(long)]
        full: bool,
    },
}

/// Flags shared by the experiment subcommands. Each overrides the value
/// from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseKind>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Comma-separated run seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Seed of the random `l1rand` instance.
    #[arg(long, visible_alias = "seed")]
    pub instance_seed: Option<u64>,
    #[arg(long)]
    pub max_evals: Option<u64>,
    /// Baseline step; tuned when absent.
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub theta0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub grid_points: Option<u64>,
    /// Recompute reference optima instead of reading the cache.
    #[arg(long)]
    pub no_cache: bool,
    /// Print the merged configuration and the resolved method settings
    /// as JSON, then exit.
    #[arg(long)]
    pub show_config: bool,
}

impl ExperimentArgs {
    /// File configuration (or defaults) with flags applied on top.
    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.problem {
            cfg.problem = v.clone();
        }
        if let Some(v) = self.noise {
            cfg.noise = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = &self.seeds {
            cfg.seeds = v.clone();
        }
        if let Some(v) = self.instance_seed {
            cfg.instance_seed = v;
        }
        if let Some(v) = &self.output {
            cfg.output = v.clone();
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = self.grid_points {
            cfg.grid_points = v;
        }
        let s = &mut cfg.solver;
        s.max_evals = self.max_evals.or(s.max_evals);
        s.alpha0 = self.alpha0.or(s.alpha0);
        s.theta0 = self.theta0.or(s.theta0);
        s.gamma = self.gamma.or(s.gamma);
        if cfg.problem == "l1rand" {
            cfg.noise = NoiseKind::Uniform;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn cache(&self) -> Option<PathBuf> {
        (!self.no_cache).then(cache_dir)
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => with_config(&args, out, |cfg, out| run(&cfg, args.cache().as_deref(), out)),
        Command::TuneBaseline(args) => with_config(&args, out, |cfg, out| tune(&cfg, args.cache().as_deref(), out)),
        Command::Reference(args) => with_config(&args, out, |cfg, out| reference(&cfg, args.cache().as_deref(), out)),
        Command::Verify { full } => verify(full, out),
    }
}

fn with_config(
    args: &ExperimentArgs,
    out: &mut dyn Write,
    body: impl FnOnce(ExperimentConfig, &mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    let cfg = args.resolve()?;
    if args.show_config {
        let text = serde_json::to_string_pretty(&shown_config(&cfg)?).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(out, "{text}")?;
        return Ok(());
    }
    body(cfg, out)
}

/// The experiment plus the settings the method will actually use. An
/// untuned baseline step shows as `null`.
pub fn shown_config(cfg: &ExperimentConfig) -> CliResult<serde_json::Value> {
    let to_value = |v: Result<serde_json::Value, serde_json::Error>| v.map_err(|e| CliError::Runtime(e.to_string()));
    let resolved = match cfg.method.test_kind() {
        Some(kind) => to_value(serde_json::to_value(cfg.solver_config(kind, 0)?))?,
        None => {
            let mut v = to_value(serde_json::to_value(cfg.baseline_config(0, cfg.solver.alpha0.unwrap_or(1.0))?))?;
            if cfg.solver.alpha0.is_none() {
                v["alpha0"] = serde_json::Value::Null;
            }
            v
        }
    };
    let mut resolved = resolved;
    if let Some(obj) = resolved.as_object_mut() {
        obj.remove("run_seed");
    }
    Ok(serde_json::json!({ "experiment": to_value(serde_json::to_value(cfg))?, "resolved": resolved }))
}

/// Runs every seed of `cfg`; baselines without a step are tuned first.
pub fn run_records(cfg: &ExperimentConfig, problem: &Problem, f_star: f64) -> CliResult<Vec<RunRecord>> {
    if let Some(kind) = cfg.method.test_kind() {
        let configs = cfg.seeds.iter().map(|&s| cfg.solver_config(kind, s)).collect::<CliResult<Vec<_>>>()?;
        return configs
            .par_iter()
            .map(|c| run_fd_lbfgs(problem, c, f_star).map_err(CliError::from))
            .collect();
    }
    let method = cfg.method.baseline().expect("non-solver methods are baselines");
    let alpha0 = match cfg.solver.alpha0 {
        Some(a) => a,
        None => tune_records(cfg, problem, f_star)?.best.alpha0,
    };
    let configs = cfg.seeds.iter().map(|&s| cfg.baseline_config(s, alpha0)).collect::<CliResult<Vec<_>>>()?;
    configs
        .par_iter()
        .map(|c| run_baseline(problem, method, c, f_star).map_err(CliError::from))
        .collect()
}

fn tune_records(cfg: &ExperimentConfig, problem: &Problem, f_star: f64) -> CliResult<TuneResult> {
    let method = cfg
        .method
        .baseline()
        .ok_or_else(|| CliError::Validation(format!("{} has no step size to tune", cfg.method.as_str())))?;
    let base = cfg.baseline_config(0, 1.0)?;
    Ok(tune_baseline(problem, method, &default_grid(), &cfg.seeds, &base, f_star)?)
}

fn budget(cfg: &ExperimentConfig, records: &[RunRecord]) -> u64 {
    let configured = match cfg.method.test_kind() {
        Some(kind) => cfg.solver_config(kind, 0).map(|c| c.max_evals).ok(),
        None => cfg.baseline_config(0, 1.0).map(|c| c.max_evals).ok(),
    };
    let used = records.iter().map(RunRecord::total_evals).max().unwrap_or(0);
    configured.unwrap_or(used).max(used).max(1)
}

fn trace_path(dir: &Path, cfg: &ExperimentConfig, seed: u64) -> PathBuf {
    dir.join(format!("{}-{}-seed{seed}.{}", cfg.problem, cfg.method.as_str(), cfg.format.extension()))
}

pub fn run(cfg: &ExperimentConfig, cache: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let problem = cfg.problem()?;
    let f_star = reference_optimum(&problem, cfg.instance_seed, cache)?.f_star;
    let records = run_records(cfg, &problem, f_star)?;
    fs::create_dir_all(&cfg.output)?;
    for (seed, record) in cfg.seeds.iter().zip(&records) {
        let path = trace_path(&cfg.output, cfg, *seed);
        write_trace(record, &path, cfg.format)?;
        writeln!(
            out,
            "seed {seed}: {} after {} evaluations, final gap {:e} -> {}",
            record.meta.status.as_str(),
            record.total_evals(),
            record.final_gap(),
            path.display()
        )?;
    }
    let grid = linear_grid(budget(cfg, &records), cfg.grid_points);
    let path = cfg.output.join(format!("{}-{}-aggregate.csv", cfg.problem, cfg.method.as_str()));
    fs::write(&path, aggregate_csv(&aggregate(&records, &grid)?))?;
    writeln!(out, "aggregate -> {}", path.display())?;
    Ok(())
}

pub fn tune(cfg: &ExperimentConfig, cache: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let problem = cfg.problem()?;
    let f_star = reference_optimum(&problem, cfg.instance_seed, cache)?.f_star;
    let result = tune_records(cfg, &problem, f_star)?;
    writeln!(out, "j,alpha0,mean_final_gap")?;
    for point in &result.grid {
        writeln!(out, "{},{:e},{:e}", point.j, point.alpha0, point.mean_final_gap)?;
    }
    writeln!(out, "best j={} alpha0={:e}", result.best.j, result.best.alpha0)?;
    Ok(())
}

pub fn reference(cfg: &ExperimentConfig, cache: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let problem = cfg.problem()?;
    let r = reference_optimum(&problem, cfg.instance_seed, cache)?;
    writeln!(out, "{:?}", r.f_star)?;
    Ok(())
}

pub fn verify(full: bool, out: &mut dyn Write) -> CliResult<()> {
    let reports = if full { full_suite() } else { quick_suite() };
    let failed = reports.iter().filter(|r| !r.passed).count();
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} of {} criteria failed", reports.len())));
    }
    Ok(())
}
