//! Optimization drivers.
//!
//! - [`run_fd_lbfgs`]: adaptive-sampling finite-difference L-BFGS, with the
//!   norm test (`fd-norm`) or the inner-product quasi-Newton test
//!   (`fd-ipqn`).
//! - [`run_fd_sg`], [`run_ss_sg`]: fixed-step, fixed-batch baselines with
//!   forward-difference and sphere-smoothing gradients.
//! - [`tune_baseline`]: step-size selection for the baselines.
//! - [`compute_reference_optimum`]: the `F*` used to report gaps.

mod baselines;
mod config;
mod fd_lbfgs;
mod record;
mod reference;
mod tune;

pub use baselines::{direction_rng, run_baseline, run_fd_sg, run_ss_sg, BaselineMethod};
pub use config::{BaselineConfig, Mode, SolverConfig, DEFAULT_M_BOUND, LOW_NOISE_SIGMA, NONSMOOTH_ALPHA_MIN};
pub use fd_lbfgs::{method_name, run_fd_lbfgs};
pub use record::{IterDiagnostics, RunMeta, RunRecord, Status, TraceRow};
pub use reference::{
    compute_reference_optimum, deterministic_lbfgs, ReferenceOptimum, ReferenceStatus, REFERENCE_GRAD_TOL,
    REFERENCE_MAX_EVALS,
};
pub use tune::{default_grid, ranking_gap, tune_baseline, GridPoint, TuneResult, DEFAULT_GRID};
