//! Initial trial step and backtracking on the subsampled function.
//!
//! A trial `alpha` is accepted when
//! `F_S(x + alpha p) <= F_S(x) - c1 alpha g^T H g + c2`, where `F_S` is the
//! mean over the same sample set used for `g` and `g^T H g = -g^T p`.
//! Trials with a non-finite subsampled value are rejected.

use serde::{Deserialize, Serialize};

use crate::gradients::{norm_variance, GradientEstimate};
use crate::linalg::{dot, norm_sq, pairwise_mean};
use crate::problems::Evaluator;
use crate::sampling::STATIONARY_TOL;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearchConfig {
    pub c1: f64,
    pub c2: f64,
    pub tau: f64,
    /// Zero disables the safeguard. A positive value stops backtracking at
    /// `alpha_min` and waives the decrease condition there.
    pub alpha_min: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self { c1: 1e-4, c2: 1e-14, tau: 0.5, alpha_min: 0.0, max_backtracks: 1000 }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c1 > 0.0
            && self.c1 < 0.5
            && self.c2 > 0.0
            && self.tau > 0.0
            && self.tau < 1.0
            && self.alpha_min >= 0.0
            && self.alpha_min.is_finite()
            && self.max_backtracks > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid line-search parameters {self:?}")))
        }
    }
}

/// `(1 + Var / (|S| ||g||^2))^-1`, in `(0, 1]`.
pub fn initial_step(est: &GradientEstimate) -> Result<f64> {
    let g2 = norm_sq(&est.mean);
    if !(g2.sqrt() > STATIONARY_TOL) {
        return Err(Error::Stationary);
    }
    let var = norm_variance(est)?;
    Ok(initial_step_from(var, est.len(), g2))
}

/// [`initial_step`] from its logged ingredients.
pub fn initial_step_from(variance: f64, size: usize, grad_norm_sq: f64) -> f64 {
    1.0 / (1.0 + variance / (size as f64 * grad_norm_sq))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub x_next: Vec<f64>,
    /// `f(x_next, zeta_i)` in sample order.
    pub values: Vec<f64>,
    pub f_base: f64,
    pub f_next: f64,
    /// Trial points evaluated.
    pub trials: usize,
    /// The safeguard returned `alpha_min` without the decrease condition.
    pub waived: bool,
    /// `max_backtracks` ran out; the last trial is returned.
    pub exhausted: bool,
}

fn trial(eval: &mut Evaluator<'_>, x: &[f64], p: &[f64], alpha: f64, est: &GradientEstimate) -> Result<(Vec<f64>, Vec<f64>)> {
    let xt: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect();
    let values = est.sample.ids().iter().map(|&id| eval.value_at(&xt, id)).collect::<Result<Vec<_>>>()?;
    Ok((xt, values))
}

/// Backtracks from `alpha_hat` along `p` on the sample set of `est`.
///
/// Each trial costs `|S|` evaluations. The returned `alpha` lies in
/// `(0, alpha_hat]`. Exhausting `max_backtracks` with a non-finite final
/// trial yields [`Error::EvaluationFailure`].
pub fn backtrack(
    eval: &mut Evaluator<'_>,
    x: &[f64],
    p: &[f64],
    est: &GradientEstimate,
    alpha_hat: f64,
    cfg: &LineSearchConfig,
) -> Result<LineSearchOutcome> {
    if !(alpha_hat > 0.0 && alpha_hat <= 1.0) {
        return Err(Error::invalid(format!("initial step must lie in (0, 1], got {alpha_hat}")));
    }
    let f_base = est.subsampled_value();
    let ghg = -dot(&est.mean, p);
    let mut alpha = alpha_hat;
    let mut trials = 0;
    loop {
        let (x_next, values) = trial(eval, x, p, alpha, est)?;
        trials += 1;
        let f_next = pairwise_mean(&values);
        let done = |waived, exhausted| LineSearchOutcome {
            alpha,
            x_next: x_next.clone(),
            values: values.clone(),
            f_base,
            f_next,
            trials,
            waived,
            exhausted,
        };
        if f_next.is_finite() && f_next <= f_base - cfg.c1 * alpha * ghg + cfg.c2 {
            return Ok(done(false, false));
        }
        let next = alpha * cfg.tau;
        if cfg.alpha_min > 0.0 && next < cfg.alpha_min {
            if alpha == cfg.alpha_min {
                return Ok(done(true, false));
            }
            alpha = cfg.alpha_min;
            let (x_next, values) = trial(eval, x, p, alpha, est)?;
            trials += 1;
            let f_next = pairwise_mean(&values);
            return Ok(LineSearchOutcome { alpha, x_next, values, f_base, f_next, trials, waived: true, exhausted: false });
        }
        if trials > cfg.max_backtracks || next == 0.0 {
            if !f_next.is_finite() {
                return Err(Error::EvaluationFailure);
            }
            return Ok(done(false, true));
        }
        alpha = next;
    }
}
