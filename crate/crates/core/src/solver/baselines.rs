use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crn::{mix64, SampleSource};
use crate::gradients::{fd_gradient_batch, sphere_smoothing_gradient};
use crate::linalg::axpy;
use crate::problems::{Evaluator, Problem};
use crate::{Error, Result};

use super::config::BaselineConfig;
use super::fd_lbfgs::terminal_status;
use super::record::{RunMeta, RunRecord, Status, TraceRow};

/// Stream separating smoothing directions from sample noise.
const DIRECTION_STREAM: u64 = 0x5348_5045_5245_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMethod {
    FdSg,
    SsSg,
}

impl BaselineMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineMethod::FdSg => "fd-sg",
            BaselineMethod::SsSg => "ss-sg",
        }
    }
}

/// Random generator for sphere-smoothing directions of one run.
pub fn direction_rng(run_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(run_seed ^ DIRECTION_STREAM))
}

/// `x+ = x - alpha0 g` with forward-difference batch gradients.
pub fn run_fd_sg(problem: &Problem, cfg: &BaselineConfig, f_star: f64) -> Result<RunRecord> {
    run_baseline(problem, BaselineMethod::FdSg, cfg, f_star)
}

/// `x+ = x - alpha0 g` with sphere-smoothing gradients.
pub fn run_ss_sg(problem: &Problem, cfg: &BaselineConfig, f_star: f64) -> Result<RunRecord> {
    run_baseline(problem, BaselineMethod::SsSg, cfg, f_star)
}

pub fn run_baseline(
    problem: &Problem,
    method: BaselineMethod,
    cfg: &BaselineConfig,
    f_star: f64,
) -> Result<RunRecord> {
    cfg.validate()?;
    let mut x = problem.initial_point();
    let f0 = problem.expected_value(&x)?;
    let mut meta = RunMeta {
        method: method.as_str().to_string(),
        problem: problem.name().to_string(),
        noise: problem.noise(),
        dim: problem.dim(),
        run_seed: cfg.run_seed,
        f0,
        f_star,
        status: Status::MaxIters,
        config: serde_json::to_value(cfg).map_err(|e| Error::invalid(e.to_string()))?,
    };
    let mut eval = Evaluator::new(problem).with_budget(cfg.max_evals);
    let mut source = SampleSource::new(cfg.run_seed);
    let mut rng = direction_rng(cfg.run_seed);
    let mut rows = Vec::new();

    let mut iter = 0u64;
    while iter < cfg.max_iters {
        let step = source.draw(cfg.batch).and_then(|set| match method {
            BaselineMethod::FdSg => fd_gradient_batch(&mut eval, &x, &set, cfg.nu).map(|e| e.mean),
            BaselineMethod::SsSg => {
                sphere_smoothing_gradient(&mut eval, &x, &set, cfg.nu, cfg.directions, &mut rng)
            }
        });
        let g = match step {
            Ok(g) => g,
            Err(e) => match terminal_status(&e) {
                Some(status) => {
                    meta.status = status;
                    break;
                }
                None => return Err(e),
            },
        };
        axpy(-cfg.alpha0, &g, &mut x);
        eval.advance();
        iter += 1;
        let fvalue = problem.expected_value(&x)?;
        rows.push(TraceRow {
            iter,
            evals: eval.evaluations(),
            fvalue,
            gap: fvalue - f_star,
            batch: cfg.batch,
            alpha: cfg.alpha0,
            theta: 0.0,
            pair_accepted: false,
            test_satisfied: false,
        });
        if !fvalue.is_finite() {
            meta.status = Status::Diverged;
            break;
        }
    }
    Ok(RunRecord { meta, rows, diagnostics: Vec::new() })
}
