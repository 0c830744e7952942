//! Acceptance checks. Each returns a [`Report`] with the measured
//! quantities; the `verify` command and the acceptance test target both
//! run them.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zoqn::crn::{draw_set, realize_noise, NoiseDist, SampleId, SampleSource};
use zoqn::gradients::fd_gradient_batch;
use zoqn::lbfgs::{LbfgsMemory, PairRule};
use zoqn::linesearch::{backtrack, LineSearchConfig};
use zoqn::problems::{Evaluator, NoiseModel, Problem};
use zoqn::sampling::{TestKind, ThetaState};
use zoqn::solver::{
    compute_reference_optimum, default_grid, run_baseline, run_fd_lbfgs, tune_baseline, BaselineConfig,
    BaselineMethod, Mode, RunRecord, SolverConfig,
};
use zoqn_oracles::{central_difference_gradient, dense_h_from_memory, forward_difference_gradient, monte_carlo_mean};

use crate::trace::{render, Format};

pub const SMOOTH_PROBLEMS: [&str; 5] = ["chebyquad", "osborne", "bdqrtic", "cube", "heart8ls"];

#[derive(Debug, Clone)]
pub struct Report {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} [{:.2}s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: u8, name: &'static str, limit: Option<Duration>, body: impl FnOnce() -> (bool, String)) -> Report {
    let start = Instant::now();
    let (ok, mut detail) = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    if !in_time {
        detail.push_str(&format!("; exceeded time limit {:?}", limit.unwrap()));
    }
    Report { id, name, passed: ok && in_time, detail, elapsed }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn uniform_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Random symmetric positive definite matrix.
fn random_spd(rng: &mut ChaCha8Rng, d: usize, shift: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(d, d) * shift
}

fn quadratic(q: &DMatrix<f64>) -> Problem {
    let d = q.nrows();
    let q = q.clone();
    let value = move |x: &[f64]| 0.5 * DVector::from_column_slice(x).dot(&(&q * DVector::from_column_slice(x)));
    let f = value.clone();
    Problem::custom("quadratic", d, 1, NoiseModel::Exact, vec![0.0; d], move |x, _| f(x), Some(std::sync::Arc::new(value)))
        .expect("valid quadratic")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-loop recursion against the dense inverse-Hessian recursion.
pub fn two_loop_matches_dense() -> Report {
    timed(1, "two-loop equals dense recursion", secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
        let mut worst = 0.0f64;
        let mut sets = 0;
        for d in [2, 5, 10] {
            for m in [1, 3, 10] {
                for _ in 0..100 {
                    let a = random_spd(&mut rng, d, 0.1);
                    let mut memory = LbfgsMemory::new(m, PairRule::default()).expect("valid memory");
                    let count = rng.random_range(1..=2 * m + 2);
                    for _ in 0..count {
                        let s = uniform_vec(&mut rng, d);
                        let y: Vec<f64> = (&a * DVector::from_column_slice(&s)).iter().copied().collect();
                        assert!(memory.try_store(&s, &y).expect("matching lengths"));
                    }
                    let g = uniform_vec(&mut rng, d);
                    let dense = dense_h_from_memory(&memory, d) * DVector::from_column_slice(&g);
                    let fast = DVector::from_vec(memory.two_loop(&g));
                    worst = worst.max((fast - &dense).norm() / dense.norm());
                    sets += 1;
                }
            }
        }
        (worst <= 1e-10, format!("{sets} pair sets, max relative error {worst:.3e} (limit 1e-10)"))
    })
}

/// Forward-difference bias on a quadratic against `L nu sqrt(d) / 2`.
pub fn fd_bias_bound() -> Report {
    timed(2, "finite-difference bias bound", secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
        let d = 10;
        let q = random_spd(&mut rng, d, 0.5);
        let l = SymmetricEigen::new(q.clone()).eigenvalues.max();
        let problem = quadratic(&q);
        let x = uniform_vec(&mut rng, d);
        let grad = &q * DVector::from_column_slice(&x);
        let mut ok = true;
        let mut parts = Vec::new();
        for nu in [1e-2, 1e-4, 1e-6] {
            let mut eval = Evaluator::new(&problem);
            let set = draw_set(1, 2, 0).expect("nonzero count").0;
            let est = fd_gradient_batch(&mut eval, &x, &set, nu).expect("finite quadratic");
            let err = (DVector::from_vec(est.mean) - &grad).norm();
            let bound = l * nu * (d as f64).sqrt() / 2.0 * (1.0 + 1e-6);
            ok &= err <= bound;
            parts.push(format!("nu={nu:e}: {err:.3e} <= {bound:.3e}"));
        }
        (ok, parts.join(", "))
    })
}

/// Grand mean of `batches` size-2 estimates at `x` against the
/// deterministic forward-difference gradient; worst deviation in standard
/// errors.
fn unbiasedness_at(problem: &Problem, x: &[f64], batches: u64, seed: u64) -> (bool, f64, usize) {
    let nu = 1e-8;
    let det = forward_difference_gradient(|y| problem.expected_value(y).expect("dimension"), x, nu);
    let d = x.len();
    let mut mean = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    let mut eval = Evaluator::new(problem);
    let mut source = SampleSource::new(seed);
    for b in 0..batches {
        let set = source.draw(2).expect("nonzero count");
        let g = fd_gradient_batch(&mut eval, x, &set, nu).expect("finite values").mean;
        eval.advance();
        for j in 0..d {
            let delta = g[j] - mean[j];
            mean[j] += delta / (b + 1) as f64;
            m2[j] += delta * (g[j] - mean[j]);
        }
    }
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for j in 0..d {
        let se = (m2[j] / (batches - 1) as f64 / batches as f64).sqrt();
        let dev = (mean[j] - det[j]).abs();
        ok &= dev <= 4.0 * se;
        if se > 0.0 {
            worst = worst.max(dev / se);
        } else {
            degenerate += 1;
        }
    }
    (ok, worst, degenerate)
}

/// Batch estimator unbiasedness toward the deterministic difference
/// gradient on chebyquad with absolute noise.
pub fn estimator_unbiasedness() -> Report {
    timed(3, "estimator unbiasedness", secs(30), || {
        let problem = Problem::from_name("chebyquad", NoiseModel::Absolute { sigma: 1e-3 }, 0).expect("registered");
        let x0 = problem.initial_point();
        let (ok0, worst0, zero0) = unbiasedness_at(&problem, &x0, 10_000, 31);
        let xs: Vec<f64> = x0.iter().map(|v| v / 10.0).collect();
        let (ok1, worst1, zero1) = unbiasedness_at(&problem, &xs, 10_000, 32);
        (
            ok0 && ok1,
            format!(
                "x0: max {worst0:.2} SE ({zero0} components with zero spread); \
                 x_s: max {worst1:.2} SE ({zero1} with zero spread); limit 4 SE"
            ),
        )
    })
}

/// Every step on a grid inside the guaranteed interval passes the
/// sufficient-decrease test on a noise-free quadratic with `H = I`.
pub fn sufficient_decrease_interval() -> Report {
    timed(4, "sufficient-decrease interval", secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
        let d = 5;
        let raw = random_spd(&mut rng, d, 0.2);
        let l_raw = SymmetricEigen::new(raw.clone()).eigenvalues.max();
        let q = raw * (4.0 / l_raw);
        let l = 4.0;
        let problem = quadratic(&q);
        let x = uniform_vec(&mut rng, d);
        let cfg = LineSearchConfig::default();
        let nu = 1e-8;
        let upper = ((1.0 - 2.0 * cfg.c1) / l).min(8.0 * cfg.c2 / (l * l * nu * nu * d as f64));
        let mut eval = Evaluator::new(&problem);
        let set = draw_set(4, 2, 0).expect("nonzero count").0;
        let est = fd_gradient_batch(&mut eval, &x, &set, nu).expect("finite quadratic");
        let p: Vec<f64> = est.mean.iter().map(|v| -v).collect();
        let g2: f64 = est.mean.iter().map(|v| v * v).sum();
        let mut failures = 0;
        for i in 1..=100 {
            let alpha = upper * i as f64 / 101.0;
            let xt: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let lhs = problem.expected_value(&xt).expect("dimension");
            let rhs = est.subsampled_value() - cfg.c1 * alpha * g2 + cfg.c2;
            let out = backtrack(&mut eval, &x, &p, &est, alpha, &cfg).expect("finite quadratic");
            if lhs > rhs || out.alpha != alpha || out.trials != 1 {
                failures += 1;
            }
        }
        (failures == 0, format!("100 steps in (0, {upper:.4e}), {failures} violations"))
    })
}

/// Closed forms of the nonsmooth instance against Monte Carlo and
/// central differences.
pub fn nonsmooth_closed_forms() -> Report {
    timed(5, "nonsmooth closed forms", secs(60), || {
        let problem = Problem::l1rand(7, 50).expect("valid instance");
        let data = problem.nonsmooth_data().expect("nonsmooth").clone();
        let (p, d) = (data.rows(), data.cols());
        let x_star = data.x_star().to_vec();
        let f_star = problem.expected_value(&x_star).expect("dimension");
        let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
        let mut worst_se = 0.0f64;
        let mut worst_grad = 0.0f64;
        let mut mc_ok = true;
        let mut replay_ok = true;
        for k in 0..20 {
            let scale = 10f64.powf(-2.0 + 2.0 * k as f64 / 19.0);
            let x: Vec<f64> = x_star.iter().map(|v| v + scale * rng.random_range(-1.0..1.0) * 3f64.sqrt()).collect();
            let c: Vec<f64> = (0..p)
                .map(|i| (0..d).map(|j| data.matrix()[i * d + j] * x[j]).sum::<f64>() - data.b()[i])
                .collect();
            let sample = |seed: u64, i: u64| -> f64 {
                let zeta = realize_noise(SampleId::new(seed, i), p, NoiseDist::Uniform);
                c.iter().zip(&zeta).map(|(ci, zi)| (ci - zi).abs()).sum()
            };
            let seed = 500 + k;
            let mut counter = Default::default();
            for i in 0..5 {
                let lib = problem.stochastic_value(&x, SampleId::new(seed, i), &mut counter).expect("dimension");
                replay_ok &= (lib - sample(seed, i)).abs() <= 1e-12 * lib.abs().max(1.0);
            }
            let mc = monte_carlo_mean(sample, 1_000_000, seed);
            let closed = problem.expected_value(&x).expect("dimension");
            mc_ok &= mc.within(closed, 3.0);
            worst_se = worst_se.max((mc.mean - closed).abs() / mc.stderr);
            let analytic = problem.expected_gradient_nonsmooth(&x).expect("nonsmooth");
            let numeric = central_difference_gradient(|y| problem.expected_value(y).expect("dimension"), &x, 1e-6);
            for (a, b) in analytic.iter().zip(&numeric) {
                worst_grad = worst_grad.max((a - b).abs());
            }
        }
        let ok = mc_ok && replay_ok && worst_grad <= 1e-5 && f_star == 25.0;
        (
            ok,
            format!(
                "max |MC - F| {worst_se:.2} SE (limit 3), max gradient error {worst_grad:.2e} (limit 1e-5), \
                 F(x*) = {f_star:?}"
            ),
        )
    })
}

/// Moderate-budget runs of both tests on every problem, with their
/// configurations.
pub fn recorded_runs(max_evals: u64) -> Vec<(SolverConfig, RunRecord)> {
    let mut problems: Vec<Problem> = SMOOTH_PROBLEMS
        .iter()
        .map(|n| Problem::from_name(n, NoiseModel::Absolute { sigma: 1e-3 }, 0).expect("registered"))
        .collect();
    problems.push(Problem::from_name("chebyquad", NoiseModel::Relative { sigma: 1e-5 }, 0).expect("registered"));
    problems.push(Problem::l1rand(7, 50).expect("valid instance"));
    let mut out = Vec::new();
    for problem in &problems {
        let f_star = compute_reference_optimum(problem).expect("reference").f_star;
        for kind in [TestKind::Norm, TestKind::Ipqn] {
            let mut cfg = SolverConfig::for_problem(problem, kind).with_seed(1);
            cfg.max_evals = max_evals;
            let record = run_fd_lbfgs(problem, &cfg, f_star).expect("valid run");
            out.push((cfg, record));
        }
    }
    out
}

fn run_label(r: &RunRecord) -> String {
    format!("{}/{}/{}", r.meta.problem, r.meta.noise, r.meta.method)
}

/// Threshold replay and sample-size monotonicity.
pub fn controller_fidelity(runs: &[(SolverConfig, RunRecord)]) -> Report {
    timed(6, "controller fidelity", None, || {
        let mut bad = Vec::new();
        let mut rows = 0;
        for (cfg, rec) in runs {
            let mut state = ThetaState::new(cfg.theta0, cfg.gamma, cfg.policy.initial_size).expect("valid");
            let mut prev = cfg.policy.initial_size;
            for row in &rec.rows {
                let theta = state.update(row.batch);
                if theta != row.theta || row.batch < prev {
                    bad.push(format!("{} iter {}", run_label(rec), row.iter));
                    break;
                }
                prev = row.batch;
                rows += 1;
            }
        }
        (bad.is_empty(), format!("{} runs, {rows} rows replayed, mismatches: {bad:?}", runs.len()))
    })
}

/// Accepted-pair inequalities and descent after every acceptance.
pub fn curvature_invariants(runs: &[(SolverConfig, RunRecord)]) -> Report {
    timed(7, "curvature invariants", None, || {
        let mut bad = Vec::new();
        let mut pairs = 0;
        let mut directions = 0;
        for (cfg, rec) in runs {
            for (k, diag) in rec.diagnostics.iter().enumerate() {
                if let Some(pair) = &diag.pair {
                    pairs += 1;
                    let ys: f64 = pair.y.iter().zip(&pair.s).map(|(a, b)| a * b).sum();
                    let ss: f64 = pair.s.iter().map(|v| v * v).sum();
                    let yy: f64 = pair.y.iter().map(|v| v * v).sum();
                    let ok = ys > cfg.beta1 * ss
                        && match cfg.mode {
                            Mode::Smooth => yy / ys >= cfg.beta1,
                            Mode::Nonsmooth => yy.sqrt() <= cfg.m_bound * ss.sqrt(),
                        };
                    if !ok {
                        bad.push(format!("{} pair at iter {}", run_label(rec), k + 1));
                    }
                    if let Some(next) = rec.diagnostics.get(k + 1) {
                        directions += 1;
                        if !(next.ptg < 0.0) {
                            bad.push(format!("{} ascent at iter {}", run_label(rec), k + 2));
                        }
                    }
                }
            }
        }
        (bad.is_empty(), format!("{pairs} accepted pairs, {directions} following directions, violations: {bad:?}"))
    })
}

/// Median gap decrease on chebyquad with small absolute noise.
pub fn chebyquad_trend() -> Report {
    timed(8, "chebyquad gap trend", secs(600), || {
        let problem = Problem::from_name("chebyquad", NoiseModel::Absolute { sigma: 1e-5 }, 0).expect("registered");
        let f_star = compute_reference_optimum(&problem).expect("reference").f_star;
        let mut ok = true;
        let mut parts = Vec::new();
        for kind in [TestKind::Norm, TestKind::Ipqn] {
            let records: Vec<RunRecord> = (1..=5)
                .map(|seed| {
                    let cfg = SolverConfig::for_problem(&problem, kind).with_seed(seed);
                    run_fd_lbfgs(&problem, &cfg, f_star).expect("valid run")
                })
                .collect();
            let initial = median(records.iter().map(|r| r.meta.initial_gap()).collect());
            let last = median(records.iter().map(RunRecord::final_gap).collect());
            let evals = records.iter().map(RunRecord::total_evals).max().unwrap_or(0);
            let orders = (initial / last).log10();
            ok &= last <= 1e-4 * initial && evals <= 500_000;
            parts.push(format!(
                "{}: median gap {initial:.3e} -> {last:.3e} ({orders:.1} orders, {evals} evals)",
                records[0].meta.method
            ));
        }
        (ok, parts.join("; "))
    })
}

/// Median evaluations to reach 1% of the initial gap; infinite when a
/// run never does.
fn median_evals_to_reach(records: &[RunRecord]) -> f64 {
    median(
        records
            .iter()
            .map(|r| r.evals_to_reach(1e-2 * r.meta.initial_gap()).map_or(f64::INFINITY, |e| e as f64))
            .collect(),
    )
}

/// FD-IPQN against the best tuned FD-SG on the smooth problems.
pub fn efficiency_against_tuned_sg() -> Report {
    timed(9, "efficiency against tuned FD-SG", secs(3600), || {
        let seeds = [1u64, 2, 3, 4, 5];
        let mut wins = 0;
        let mut parts = Vec::new();
        for name in SMOOTH_PROBLEMS {
            let problem = Problem::from_name(name, NoiseModel::Absolute { sigma: 1e-3 }, 0).expect("registered");
            let f_star = compute_reference_optimum(&problem).expect("reference").f_star;
            let ipqn: Vec<RunRecord> = seeds
                .iter()
                .map(|&s| {
                    let cfg = SolverConfig::for_problem(&problem, TestKind::Ipqn).with_seed(s);
                    run_fd_lbfgs(&problem, &cfg, f_star).expect("valid run")
                })
                .collect();
            let tuned = tune_baseline(&problem, BaselineMethod::FdSg, &default_grid(), &seeds, &BaselineConfig::default(), f_star)
                .expect("valid tuning");
            let a = median_evals_to_reach(&ipqn);
            let b = median_evals_to_reach(&tuned.records);
            let win = a < b;
            wins += win as usize;
            parts.push(format!("{name}: fd-ipqn {a} vs fd-sg(2^{}) {b}{}", tuned.best.j, if win { " win" } else { "" }));
        }
        (wins >= 3, format!("{wins}/5 wins (need 3); {}", parts.join("; ")))
    })
}

/// Byte-identical trace files from repeated runs.
pub fn determinism() -> Report {
    timed(10, "determinism", None, || {
        let dir = std::env::temp_dir().join(format!("zoqn-determinism-{}", std::process::id()));
        std::fs::create_dir_all(&dir).expect("temp dir");
        let heart = Problem::from_name("heart8ls", NoiseModel::Absolute { sigma: 1e-3 }, 0).expect("registered");
        let l1 = Problem::l1rand(3, 20).expect("valid instance");
        let mut identical = 0;
        let mut compared = 0;
        let mut run = |label: &str, make: &dyn Fn() -> RunRecord| {
            for format in [Format::Csv, Format::Json] {
                let paths: Vec<_> = (0..2)
                    .map(|k| {
                        let path = dir.join(format!("{label}-{k}.{}", format.extension()));
                        std::fs::write(&path, render(&make(), format).expect("render")).expect("write");
                        path
                    })
                    .collect();
                compared += 1;
                identical += (std::fs::read(&paths[0]).expect("read") == std::fs::read(&paths[1]).expect("read")) as usize;
            }
        };
        for kind in [TestKind::Norm, TestKind::Ipqn] {
            run(&format!("heart-{kind:?}"), &|| {
                let mut cfg = SolverConfig::for_problem(&heart, kind).with_seed(3);
                cfg.max_evals = 20_000;
                run_fd_lbfgs(&heart, &cfg, 0.0).expect("valid run")
            });
            run(&format!("l1-{kind:?}"), &|| {
                let mut cfg = SolverConfig::for_problem(&l1, kind).with_seed(4);
                cfg.max_evals = 20_000;
                run_fd_lbfgs(&l1, &cfg, 10.0).expect("valid run")
            });
        }
        for method in [BaselineMethod::FdSg, BaselineMethod::SsSg] {
            run(method.as_str(), &|| {
                let cfg = BaselineConfig { alpha0: 2f64.powi(-12), max_evals: 20_000, run_seed: 5, ..Default::default() };
                run_baseline(&heart, method, &cfg, 0.0).expect("valid run")
            });
        }
        let _ = std::fs::remove_dir_all(&dir);
        (identical == compared, format!("{identical}/{compared} trace pairs byte-identical"))
    })
}

/// Criteria that finish in seconds.
pub fn quick_suite() -> Vec<Report> {
    let runs = recorded_runs(50_000);
    vec![
        two_loop_matches_dense(),
        fd_bias_bound(),
        estimator_unbiasedness(),
        sufficient_decrease_interval(),
        nonsmooth_closed_forms(),
        controller_fidelity(&runs),
        curvature_invariants(&runs),
        determinism(),
    ]
}

/// All ten criteria, in order.
pub fn full_suite() -> Vec<Report> {
    let mut reports = quick_suite();
    reports.insert(7, chebyquad_trend());
    reports.insert(8, efficiency_against_tuned_sg());
    reports
}
