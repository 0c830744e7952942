use crate::crn::SampleSource;
use crate::gradients::fd_gradient_batch;
use crate::lbfgs::LbfgsMemory;
use crate::linalg::{dot, norm_sq, sub};
use crate::linesearch::{backtrack, initial_step};
use crate::problems::{Evaluator, Problem};
use crate::sampling::{grow_to_least_sufficient, TestKind, ThetaState};
use crate::{Error, Result};

use super::config::SolverConfig;
use super::record::{IterDiagnostics, RunMeta, RunRecord, Status, TraceRow};

pub fn method_name(kind: TestKind) -> &'static str {
    match kind {
        TestKind::Norm => "fd-norm",
        TestKind::Ipqn => "fd-ipqn",
    }
}

/// Maps an error raised inside an iteration to a terminal status.
pub(crate) fn terminal_status(err: &Error) -> Option<Status> {
    match err {
        Error::BudgetExhausted => Some(Status::Budget),
        Error::Stationary => Some(Status::Stationary),
        Error::EvaluationFailure => Some(Status::Diverged),
        _ => None,
    }
}

struct Step {
    row: TraceRow,
    diag: IterDiagnostics,
}

/// Finite-difference stochastic L-BFGS with adaptive sample sizes.
///
/// Each iteration draws a fresh set at the carried size, grows it until
/// the configured test passes, updates the threshold, steps along
/// `-H g` with a backtracking line search on the same set, and forms
/// `y = g_S(x_{k+1}) - g_S(x_k)` on that set. The line search's final
/// values serve as base points for `g_S(x_{k+1})`, so `y` costs `d |S|`
/// evaluations. `f_star` is used for reporting only.
pub fn run_fd_lbfgs(problem: &Problem, config: &SolverConfig, f_star: f64) -> Result<RunRecord> {
    config.validate()?;
    let mut x = problem.initial_point();
    let f0 = problem.expected_value(&x)?;
    let mut meta = RunMeta {
        method: method_name(config.policy.kind).to_string(),
        problem: problem.name().to_string(),
        noise: problem.noise(),
        dim: problem.dim(),
        run_seed: config.run_seed,
        f0,
        f_star,
        status: Status::MaxIters,
        config: serde_json::to_value(config).map_err(|e| Error::invalid(e.to_string()))?,
    };

    let mut eval = Evaluator::new(problem).with_budget(config.max_evals);
    let mut memory = LbfgsMemory::new(config.memory, config.pair_rule())?;
    let mut theta = ThetaState::new(config.theta0, config.gamma, config.policy.initial_size)?;
    let mut source = SampleSource::new(config.run_seed);
    let mut size = config.policy.initial_size;
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();

    for k in 0..config.max_iters {
        let step = iterate(
            k + 1,
            problem,
            config,
            &mut eval,
            &mut memory,
            &mut theta,
            &mut source,
            &mut x,
            size,
            f_star,
        );
        match step {
            Ok(Step { row, diag }) => {
                size = row.batch;
                let stop = if !row.fvalue.is_finite() {
                    Some(Status::Diverged)
                } else if config.gap_tol.is_some_and(|tol| row.gap <= tol) {
                    Some(Status::Converged)
                } else {
                    None
                };
                rows.push(row);
                diagnostics.push(diag);
                if let Some(status) = stop {
                    meta.status = status;
                    break;
                }
            }
            Err(e) => match terminal_status(&e) {
                Some(status) => {
                    meta.status = status;
                    break;
                }
                None => return Err(e),
            },
        }
    }
    Ok(RunRecord { meta, rows, diagnostics })
}

#[allow(clippy::too_many_arguments)]
fn iterate(
    iter: u64,
    problem: &Problem,
    config: &SolverConfig,
    eval: &mut Evaluator<'_>,
    memory: &mut LbfgsMemory,
    theta: &mut ThetaState,
    source: &mut SampleSource,
    x: &mut Vec<f64>,
    size: usize,
    f_star: f64,
) -> Result<Step> {
    let set = source.draw(size)?;
    let est = fd_gradient_batch(eval, x, &set, config.nu)?;
    let theta_test = theta.theta;
    let growth = grow_to_least_sufficient(&config.policy, eval, x, est, source, theta_test, memory)?;
    let est = growth.estimate;
    let theta_next = theta.update(est.len());

    let h_g = memory.two_loop(&est.mean);
    let p: Vec<f64> = h_g.iter().map(|v| -v).collect();
    let alpha_hat = initial_step(&est)?;
    let ls = backtrack(eval, x, &p, &est, alpha_hat, &config.line_search)?;

    let next = fd_gradient_batch(eval, &ls.x_next, &est.sample, config.nu)?;
    let s = sub(&ls.x_next, x);
    let y = sub(&next.mean, &est.mean);
    let accepted = memory.try_store(&s, &y)?;
    let pair = if accepted { memory.pairs().next_back().cloned() } else { None };

    *x = ls.x_next;
    eval.advance();
    let fvalue = problem.expected_value(x)?;
    let row = TraceRow {
        iter,
        evals: eval.evaluations(),
        fvalue,
        gap: fvalue - f_star,
        batch: est.len(),
        alpha: ls.alpha,
        theta: theta_next,
        pair_accepted: accepted,
        test_satisfied: growth.outcome.satisfied,
    };
    let diag = IterDiagnostics {
        variance: growth.outcome.variance,
        rhs: growth.outcome.rhs,
        theta_test,
        growth_rounds: growth.rounds,
        grad_norm_sq: norm_sq(&est.mean),
        ptg: dot(&p, &est.mean),
        alpha_hat,
        trials: ls.trials,
        waived: ls.waived,
        exhausted: ls.exhausted,
        pair,
    };
    Ok(Step { row, diag })
}
