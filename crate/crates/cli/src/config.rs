//! Experiment configuration shared by the command line and `--config`
//! files. Command-line flags override file values.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zoqn::problems::{NoiseModel, Problem};
use zoqn::sampling::TestKind;
use zoqn::solver::{BaselineConfig, BaselineMethod, SolverConfig};

use crate::error::{CliError, CliResult};
use crate::trace::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FdNorm,
    FdIpqn,
    FdSg,
    SsSg,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::FdNorm => "fd-norm",
            Method::FdIpqn => "fd-ipqn",
            Method::FdSg => "fd-sg",
            Method::SsSg => "ss-sg",
        }
    }

    pub fn test_kind(&self) -> Option<TestKind> {
        match self {
            Method::FdNorm => Some(TestKind::Norm),
            Method::FdIpqn => Some(TestKind::Ipqn),
            _ => None,
        }
    }

    pub fn baseline(&self) -> Option<BaselineMethod> {
        match self {
            Method::FdSg => Some(BaselineMethod::FdSg),
            Method::SsSg => Some(BaselineMethod::SsSg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Abs,
    Rel,
    Uniform,
}

/// Partial solver settings; unset fields keep the problem defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub theta0: Option<f64>,
    pub gamma: Option<f64>,
    pub nu: Option<f64>,
    pub memory: Option<usize>,
    pub initial_size: Option<usize>,
    pub cap: Option<usize>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub tau: Option<f64>,
    pub alpha_min: Option<f64>,
    pub max_backtracks: Option<usize>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub m_bound: Option<f64>,
    pub max_evals: Option<u64>,
    pub max_iters: Option<u64>,
    pub gap_tol: Option<f64>,
    /// Baseline step; tuned over the grid when absent.
    pub alpha0: Option<f64>,
    pub batch: Option<usize>,
    pub directions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    pub noise: NoiseKind,
    pub sigma: f64,
    pub method: Method,
    pub seeds: Vec<u64>,
    /// Seed of the random `l1rand` instance.
    pub instance_seed: u64,
    pub solver: SolverOverrides,
    pub output: PathBuf,
    pub format: Format,
    /// Points of the aggregate evaluation grid.
    pub grid_points: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "chebyquad".into(),
            noise: NoiseKind::Abs,
            sigma: 1e-3,
            method: Method::FdIpqn,
            seeds: vec![1, 2, 3, 4, 5],
            instance_seed: 0,
            solver: SolverOverrides::default(),
            output: PathBuf::from("runs"),
            format: Format::Csv,
            grid_points: 100,
        }
    }
}

pub fn noise_model(kind: NoiseKind, sigma: f64) -> CliResult<NoiseModel> {
    let needs_sigma = !matches!(kind, NoiseKind::Uniform);
    if needs_sigma && !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CliError::Validation(format!("sigma must be positive, got {sigma}")));
    }
    Ok(match kind {
        NoiseKind::Abs => NoiseModel::Absolute { sigma },
        NoiseKind::Rel => NoiseModel::Relative { sigma },
        NoiseKind::Uniform => NoiseModel::UniformL1,
    })
}

/// Builds a registered problem; `l1rand` always uses uniform noise.
pub fn build_problem(name: &str, kind: NoiseKind, sigma: f64, instance_seed: u64) -> CliResult<Problem> {
    let noise = if name == "l1rand" { NoiseModel::UniformL1 } else { noise_model(kind, sigma)? };
    Ok(Problem::from_name(name, noise, instance_seed)?)
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Validation("at least one seed is required".into()));
        }
        if self.problem != "l1rand" && self.noise == NoiseKind::Uniform {
            return Err(CliError::Validation("uniform noise applies to l1rand only".into()));
        }
        self.problem()?;
        if let Some(kind) = self.method.test_kind() {
            self.solver_config(kind, 0)?;
        } else {
            self.baseline_config(0, self.solver.alpha0.unwrap_or(1.0))?;
        }
        Ok(())
    }

    pub fn problem(&self) -> CliResult<Problem> {
        build_problem(&self.problem, self.noise, self.sigma, self.instance_seed)
    }

    pub fn solver_config(&self, kind: TestKind, seed: u64) -> CliResult<SolverConfig> {
        let mut c = SolverConfig::for_problem(&self.problem()?, kind).with_seed(seed);
        let o = &self.solver;
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = o.$src { c.$($dst).+ = v; })*
            };
        }
        set!(
            theta0 => theta0, gamma => gamma, nu => nu, memory => memory,
            initial_size => policy.initial_size, cap => policy.cap,
            c1 => line_search.c1, c2 => line_search.c2, tau => line_search.tau,
            alpha_min => line_search.alpha_min, max_backtracks => line_search.max_backtracks,
            beta1 => beta1, beta2 => beta2, m_bound => m_bound,
            max_evals => max_evals, max_iters => max_iters,
        );
        c.gap_tol = o.gap_tol.or(c.gap_tol);
        c.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(c)
    }

    pub fn baseline_config(&self, seed: u64, alpha0: f64) -> CliResult<BaselineConfig> {
        let mut c = BaselineConfig { alpha0, run_seed: seed, ..BaselineConfig::default() };
        let o = &self.solver;
        if let Some(v) = o.nu {
            c.nu = v;
        }
        if let Some(v) = o.batch {
            c.batch = v;
        }
        if let Some(v) = o.directions {
            c.directions = v;
        }
        if let Some(v) = o.max_evals {
            c.max_evals = v;
        }
        if let Some(v) = o.max_iters {
            c.max_iters = v;
        }
        c.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(c)
    }
}
