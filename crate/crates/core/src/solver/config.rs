use serde::{Deserialize, Serialize};

use crate::lbfgs::PairRule;
use crate::linesearch::LineSearchConfig;
use crate::problems::Problem;
use crate::sampling::{SamplingPolicy, TestKind};
use crate::{Error, Result};

/// Noise level at or below which the slower threshold decay is used.
pub const LOW_NOISE_SIGMA: f64 = 1e-5;

/// Curvature bound used in nonsmooth mode without a Lipschitz estimate.
pub const DEFAULT_M_BOUND: f64 = 1e3;

/// Safeguard step for nonsmooth problems.
pub const NONSMOOTH_ALPHA_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Smooth,
    Nonsmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub policy: SamplingPolicy,
    pub theta0: f64,
    pub gamma: f64,
    pub nu: f64,
    pub memory: usize,
    pub line_search: LineSearchConfig,
    pub beta1: f64,
    pub beta2: f64,
    /// `M` in `||y|| <= M ||s||`; nonsmooth mode only.
    pub m_bound: f64,
    pub mode: Mode,
    pub max_evals: u64,
    pub max_iters: u64,
    pub run_seed: u64,
    /// Stop once the optimality gap is at most this value.
    pub gap_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            policy: SamplingPolicy::new(TestKind::Norm),
            theta0: 0.9,
            gamma: 0.9,
            nu: 1e-8,
            memory: 10,
            line_search: LineSearchConfig::default(),
            beta1: 1e-3,
            beta2: 0.0,
            m_bound: DEFAULT_M_BOUND,
            mode: Mode::Smooth,
            max_evals: 500_000,
            max_iters: 10_000,
            run_seed: 0,
            gap_tol: None,
        }
    }
}

impl SolverConfig {
    /// Defaults adapted to `problem`: `gamma = 0.99` for small Gaussian
    /// noise and 0.9 otherwise; nonsmooth problems get the `alpha_min`
    /// safeguard and `M = 10 L` when a Lipschitz estimate is known.
    pub fn for_problem(problem: &Problem, kind: TestKind) -> Self {
        let mut cfg = Self { policy: SamplingPolicy::new(kind), ..Self::default() };
        if matches!(problem.noise().sigma(), Some(s) if s <= LOW_NOISE_SIGMA) {
            cfg.gamma = 0.99;
        }
        if problem.is_nonsmooth() {
            cfg.mode = Mode::Nonsmooth;
            cfg.line_search.alpha_min = NONSMOOTH_ALPHA_MIN;
            cfg.m_bound = problem.lipschitz_hint().map_or(DEFAULT_M_BOUND, |l| 10.0 * l);
        }
        cfg
    }

    pub fn with_seed(mut self, run_seed: u64) -> Self {
        self.run_seed = run_seed;
        self
    }

    pub fn pair_rule(&self) -> PairRule {
        match self.mode {
            Mode::Smooth => PairRule::Smooth { beta1: self.beta1, beta2: self.beta2 },
            Mode::Nonsmooth => PairRule::Nonsmooth { beta1: self.beta1, m_bound: self.m_bound },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        self.line_search.validate()?;
        if !(self.theta0 > 0.0 && self.theta0.is_finite()) {
            return Err(Error::invalid(format!("theta0 must be positive, got {}", self.theta0)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if self.memory == 0 {
            return Err(Error::invalid("memory must be at least 1"));
        }
        if !(self.beta1 > 0.0) || !(self.beta2 >= 0.0) || !(self.m_bound > 0.0) {
            return Err(Error::invalid("need beta1 > 0, beta2 >= 0 and m_bound > 0"));
        }
        if self.max_evals == 0 {
            return Err(Error::invalid("max_evals must be positive"));
        }
        Ok(())
    }
}

/// Fixed-step baseline parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub alpha0: f64,
    pub batch: usize,
    pub nu: f64,
    /// Directions per sphere-smoothing estimate.
    pub directions: usize,
    pub max_evals: u64,
    pub max_iters: u64,
    pub run_seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            batch: 2,
            nu: 1e-8,
            directions: 5,
            max_evals: 500_000,
            max_iters: u64::MAX,
            run_seed: 0,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 >= 0.0 && self.alpha0.is_finite()) {
            return Err(Error::invalid(format!("alpha0 must be finite and nonnegative, got {}", self.alpha0)));
        }
        if self.batch == 0 || self.directions == 0 {
            return Err(Error::invalid("batch and directions must be positive"));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if self.max_evals == 0 {
            return Err(Error::invalid("max_evals must be positive"));
        }
        Ok(())
    }
}
