use serde::{Deserialize, Serialize};

use crate::lbfgs::CurvaturePair;
use crate::problems::NoiseModel;

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Budget,
    MaxIters,
    Stationary,
    Converged,
    /// A function value or iterate became non-finite.
    Diverged,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Budget => "budget",
            Status::MaxIters => "max_iters",
            Status::Stationary => "stationary",
            Status::Converged => "converged",
            Status::Diverged => "diverged",
        }
    }
}

/// State after `iter` completed iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: u64,
    /// Cumulative stochastic evaluations.
    pub evals: u64,
    /// Noise-free `F(x_iter)`.
    pub fvalue: f64,
    pub gap: f64,
    /// Sample size used by the iteration.
    pub batch: usize,
    pub alpha: f64,
    /// Threshold after the controller update; 0 for the baselines.
    pub theta: f64,
    pub pair_accepted: bool,
    pub test_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub method: String,
    pub problem: String,
    pub noise: NoiseModel,
    pub dim: usize,
    pub run_seed: u64,
    /// `F(x_0)`.
    pub f0: f64,
    pub f_star: f64,
    pub status: Status,
    /// Serialized solver or baseline configuration.
    pub config: serde_json::Value,
}

impl RunMeta {
    pub fn initial_gap(&self) -> f64 {
        self.f0 - self.f_star
    }
}

/// Per-iteration quantities behind a trace row; not part of the trace files.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterDiagnostics {
    /// Variance and right-hand side of the last sample-size test.
    pub variance: f64,
    pub rhs: f64,
    /// Threshold the test was evaluated with.
    pub theta_test: f64,
    pub growth_rounds: usize,
    pub grad_norm_sq: f64,
    /// `p^T g` of the search direction.
    pub ptg: f64,
    pub alpha_hat: f64,
    pub trials: usize,
    pub waived: bool,
    pub exhausted: bool,
    /// The stored pair when one was accepted.
    pub pair: Option<CurvaturePair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub rows: Vec<TraceRow>,
    /// One entry per row for the quasi-Newton methods, empty otherwise.
    pub diagnostics: Vec<IterDiagnostics>,
}

impl RunRecord {
    pub fn final_gap(&self) -> f64 {
        self.rows.last().map_or(self.meta.initial_gap(), |r| r.gap)
    }

    pub fn total_evals(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.evals)
    }

    /// Evaluations at the first row with `gap <= target`.
    pub fn evals_to_reach(&self, target: f64) -> Option<u64> {
        if self.meta.initial_gap() <= target {
            return Some(0);
        }
        self.rows.iter().find(|r| r.gap <= target).map(|r| r.evals)
    }
}
