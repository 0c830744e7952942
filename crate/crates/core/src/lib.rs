//! Derivative-free stochastic optimization with adaptive sample sizes.
//!
//! The main entry point is [`solver::run_fd_lbfgs`], a stochastic L-BFGS
//! method whose gradients are forward-difference estimates computed under
//! common random numbers. The sample size used for each estimate grows
//! whenever a variance test (norm test or inner-product quasi-Newton test)
//! fails. Fixed-step zeroth-order baselines ([`solver::run_fd_sg`],
//! [`solver::run_ss_sg`]) and the benchmark problems used to compare them are
//! provided alongside.
//!
//! Module map:
//!
//! - [`crn`]: counter-based noise realization, so one sample id yields the
//!   same noise vector at every point it is evaluated.
//! - [`problems`]: nonlinear least-squares benchmarks under absolute and
//!   relative Gaussian noise, and a random nonsmooth `l1` problem with a
//!   closed-form expectation.
//! - [`gradients`]: forward-difference and sphere-smoothing estimators and
//!   the variance statistics used by the sampling tests.
//! - [`sampling`]: the two sample-size tests and the threshold controller.
//! - [`lbfgs`]: curvature-pair memory and the two-loop recursion.
//! - [`linesearch`]: initial trial step and backtracking on the subsampled
//!   function.
//! - [`solver`]: the drivers, baseline tuning and reference optima.

pub mod crn;
pub mod error;
pub mod gradients;
pub mod lbfgs;
pub mod linalg;
pub mod linesearch;
pub mod problems;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
