//! Sample-size control.
//!
//! With `g` the batch gradient, `H` the current inverse-Hessian estimate and
//! `Var` the matching sample variance, the tests read
//!
//! - norm: `Var / |S| <= theta^2 ||g||^2`,
//! - inner-product quasi-Newton: `Var / |S| <= theta^2 ||H g||^4`.
//!
//! A failed test projects the least sufficient size
//! `N* = ceil(Var / (theta^2 rhs))`, augments the sample with fresh ids and
//! re-tests, for a bounded number of rounds.

use serde::{Deserialize, Serialize};

use crate::crn::SampleSource;
use crate::gradients::{ipqn_variance, norm_variance, GradientEstimate};
use crate::lbfgs::LbfgsMemory;
use crate::linalg::norm;
use crate::problems::Evaluator;
use crate::{Error, Result};

/// Growth rounds per iteration.
pub const MAX_GROWTH_ROUNDS: usize = 5;

/// Right-hand-side scale below which the iterate counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Norm,
    Ipqn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPolicy {
    pub kind: TestKind,
    pub cap: usize,
    pub initial_size: usize,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        Self::new(TestKind::Norm)
    }
}

impl SamplingPolicy {
    pub fn new(kind: TestKind) -> Self {
        Self { kind, cap: 10_000, initial_size: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_size == 0 || self.cap < self.initial_size {
            return Err(Error::invalid(format!(
                "sample sizes need 1 <= initial_size ({}) <= cap ({})",
                self.initial_size, self.cap
            )));
        }
        Ok(())
    }
}

/// Geometric threshold controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaState {
    pub theta: f64,
    pub theta0: f64,
    pub gamma: f64,
    pub prev_size: usize,
}

impl ThetaState {
    pub fn new(theta0: f64, gamma: f64, initial_size: usize) -> Result<Self> {
        if !(theta0 > 0.0) || !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid(format!(
                "need theta0 > 0 and gamma in (0, 1), got {theta0} and {gamma}"
            )));
        }
        Ok(Self { theta: theta0, theta0, gamma, prev_size: initial_size })
    }

    /// Shrinks `theta` by `gamma` if the size is unchanged, resets it to
    /// `theta0` otherwise. Returns the new `theta`.
    pub fn update(&mut self, cur_size: usize) -> f64 {
        self.theta = if cur_size == self.prev_size { self.theta * self.gamma } else { self.theta0 };
        self.prev_size = cur_size;
        self.theta
    }
}

/// One evaluation of a sample-size test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub satisfied: bool,
    pub variance: f64,
    /// `||g||^2` (norm) or `||H g||^4` (ipqn).
    pub rhs: f64,
    pub size: usize,
    pub theta: f64,
}

impl TestOutcome {
    /// Least size passing the test for the current variance estimate.
    pub fn required_size(&self) -> f64 {
        (self.variance / (self.theta * self.theta * self.rhs)).ceil()
    }
}

/// Evaluates the test. A single sample always fails with zero variance.
/// Fails with [`Error::Stationary`] when `||g||` (norm) or `||H g||`
/// (ipqn) is at most [`STATIONARY_TOL`].
pub fn evaluate_test(
    kind: TestKind,
    est: &GradientEstimate,
    memory: &LbfgsMemory,
    theta: f64,
) -> Result<TestOutcome> {
    let scale = match kind {
        TestKind::Norm => norm(&est.mean),
        TestKind::Ipqn => norm(&memory.apply_h(&est.mean)),
    };
    if !(scale > STATIONARY_TOL) {
        return Err(Error::Stationary);
    }
    let rhs = match kind {
        TestKind::Norm => scale * scale,
        TestKind::Ipqn => (scale * scale) * (scale * scale),
    };
    let size = est.len();
    if size < 2 {
        return Ok(TestOutcome { satisfied: false, variance: 0.0, rhs, size, theta });
    }
    let variance = match kind {
        TestKind::Norm => norm_variance(est)?,
        TestKind::Ipqn => ipqn_variance(est, memory)?,
    };
    let satisfied = variance / size as f64 <= theta * theta * rhs;
    Ok(TestOutcome { satisfied, variance, rhs, size, theta })
}

pub fn test_satisfied(
    policy: &SamplingPolicy,
    est: &GradientEstimate,
    memory: &LbfgsMemory,
    theta: f64,
) -> Result<bool> {
    Ok(evaluate_test(policy.kind, est, memory, theta)?.satisfied)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub estimate: GradientEstimate,
    /// The last test evaluated, on `estimate`.
    pub outcome: TestOutcome,
    pub rounds: usize,
}

/// Grows the sample behind `est` until the test passes, the cap is reached,
/// or [`MAX_GROWTH_ROUNDS`] augmentations have been made. Existing samples
/// and their gradients are kept. An unsatisfied final outcome is not an
/// error.
#[allow(clippy::too_many_arguments)]
pub fn grow_to_least_sufficient(
    policy: &SamplingPolicy,
    eval: &mut Evaluator<'_>,
    x: &[f64],
    mut est: GradientEstimate,
    source: &mut SampleSource,
    theta: f64,
    memory: &LbfgsMemory,
) -> Result<Growth> {
    let mut rounds = 0;
    loop {
        let outcome = evaluate_test(policy.kind, &est, memory, theta)?;
        let size = est.len();
        if outcome.satisfied || size >= policy.cap || rounds == MAX_GROWTH_ROUNDS {
            return Ok(Growth { estimate: est, outcome, rounds });
        }
        let projected = if size < 2 { 2.0 } else { outcome.required_size() };
        let target = if projected.is_finite() && projected <= policy.cap as f64 {
            (projected as usize).max(size + 1)
        } else {
            policy.cap
        };
        let more = source.draw(target - size)?;
        est.augment(eval, x, &more)?;
        rounds += 1;
    }
}
