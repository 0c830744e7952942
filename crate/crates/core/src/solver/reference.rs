use serde::{Deserialize, Serialize};

use crate::lbfgs::{LbfgsMemory, PairRule};
use crate::linalg::{dot, sub};
use crate::problems::Problem;
use crate::{Error, Result};

pub const REFERENCE_GRAD_TOL: f64 = 1e-10;
pub const REFERENCE_MAX_EVALS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceStatus {
    Converged,
    Budget,
    /// Backtracking found no decrease.
    Stalled,
    /// Known in closed form.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptimum {
    pub f_star: f64,
    pub x_ref: Vec<f64>,
    /// Joint value-and-gradient evaluations.
    pub evaluations: u64,
    pub grad_inf_norm: f64,
    pub status: ReferenceStatus,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Noise-free optimum estimate: L-BFGS with exact gradients from the
/// starting point until `||grad F||_inf <= 1e-10` or 2000 evaluations, one
/// evaluation being one joint value and gradient. The nonsmooth instance
/// returns `p / 2` at `x_star`.
pub fn compute_reference_optimum(problem: &Problem) -> Result<ReferenceOptimum> {
    if let Some(data) = problem.nonsmooth_data() {
        return Ok(ReferenceOptimum {
            f_star: data.rows() as f64 / 2.0,
            x_ref: data.x_star().to_vec(),
            evaluations: 0,
            grad_inf_norm: 0.0,
            status: ReferenceStatus::Analytic,
        });
    }
    let x0 = problem.initial_point();
    deterministic_lbfgs(problem, x0, REFERENCE_GRAD_TOL, REFERENCE_MAX_EVALS)
}

fn value_and_gradient(problem: &Problem, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let f = problem.expected_value(x)?;
    let g = problem
        .expected_gradient(x)?
        .ok_or_else(|| Error::invalid(format!("{} has no exact gradient", problem.name())))?;
    Ok((f, g))
}

/// Armijo-backtracking L-BFGS (memory 10) on the noise-free objective.
pub fn deterministic_lbfgs(problem: &Problem, x0: Vec<f64>, grad_tol: f64, max_evals: u64) -> Result<ReferenceOptimum> {
    const C1: f64 = 1e-4;
    let mut memory = LbfgsMemory::new(10, PairRule::Smooth { beta1: 1e-12, beta2: 0.0 })?;
    let mut x = x0;
    let (mut f, mut g) = value_and_gradient(problem, &x)?;
    let mut evaluations = 1;
    let finish = |x: Vec<f64>, f, g: &[f64], evaluations, status| ReferenceOptimum {
        f_star: f,
        x_ref: x,
        evaluations,
        grad_inf_norm: inf_norm(g),
        status,
    };
    loop {
        if inf_norm(&g) <= grad_tol {
            return Ok(finish(x, f, &g, evaluations, ReferenceStatus::Converged));
        }
        if evaluations >= max_evals {
            return Ok(finish(x, f, &g, evaluations, ReferenceStatus::Budget));
        }
        let mut p: Vec<f64> = memory.two_loop(&g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&p, &g);
        if !(slope < 0.0) {
            memory.clear();
            p = g.iter().map(|v| -v).collect();
            slope = dot(&p, &g);
        }
        let mut alpha = if memory.is_empty() { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let accepted = loop {
            if evaluations >= max_evals {
                break None;
            }
            let xt: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let ft = problem.expected_value(&xt)?;
            evaluations += 1;
            if ft.is_finite() && ft <= f + C1 * alpha * slope {
                break Some((xt, ft));
            }
            alpha *= 0.5;
            if alpha == 0.0 || xt == x {
                return Ok(finish(x, f, &g, evaluations, ReferenceStatus::Stalled));
            }
        };
        let Some((xn, fnew)) = accepted else {
            return Ok(finish(x, f, &g, evaluations, ReferenceStatus::Budget));
        };
        let gn = problem.expected_gradient(&xn)?.expect("gradient available");
        memory.try_store(&sub(&xn, &x), &sub(&gn, &g))?;
        x = xn;
        f = fnew;
        g = gn;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::NoiseModel;

    #[test]
    fn nonsmooth_reference_is_half_p() {
        let r = compute_reference_optimum(&Problem::l1rand(7, 50).unwrap()).unwrap();
        assert_eq!(r.f_star, 25.0);
        assert_eq!(r.status, ReferenceStatus::Analytic);
    }

    #[test]
    fn budget_is_respected() {
        let p = Problem::from_name("chebyquad", NoiseModel::Absolute { sigma: 1e-3 }, 0).unwrap();
        let r = deterministic_lbfgs(&p, p.initial_point(), 0.0, 50).unwrap();
        assert_eq!(r.status, ReferenceStatus::Budget);
        assert_eq!(r.evaluations, 50);
    }
}
