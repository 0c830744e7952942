use std::sync::Arc;

use zoqn::problems::{NoiseModel, Problem};
use zoqn::sampling::TestKind;
use zoqn::solver::{
    run_baseline, run_fd_lbfgs, tune_baseline, BaselineConfig, BaselineMethod, SolverConfig, Status,
};

/// `F(x) = 1/2 sum w_i x_i^2` with weights in `[1, 4]`, no noise.
fn quadratic(d: usize) -> Problem {
    let w: Vec<f64> = (0..d).map(|i| 1.0 + 3.0 * i as f64 / (d - 1) as f64).collect();
    let value = move |x: &[f64]| 0.5 * x.iter().zip(&w).map(|(a, b)| b * a * a).sum::<f64>();
    let f = value.clone();
    Problem::custom("quadratic", d, 1, NoiseModel::Exact, vec![1.0; d], move |x, _| f(x), Some(Arc::new(value)))
        .unwrap()
        .with_lipschitz_hint(4.0)
}

/// `1/2 |x|^2 + zeta^T x`: the noise scales with the iterate, so finite
/// differences on a common sample keep a variance of `sigma^2` per
/// component.
fn multiplicative_quadratic(d: usize, sigma: f64) -> Problem {
    Problem::custom(
        "tilted-quadratic",
        d,
        d,
        NoiseModel::Absolute { sigma },
        vec![1.0; d],
        |x, z| x.iter().zip(z).map(|(a, b)| 0.5 * a * a + b * a).sum(),
        Some(Arc::new(|x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>())),
    )
    .unwrap()
}

/// `1/2 |x|^2` without noise.
fn unit_quadratic(d: usize) -> Problem {
    let value = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>();
    Problem::custom("unit-quadratic", d, 1, NoiseModel::Exact, vec![1.0; d], move |x, _| value(x), Some(Arc::new(value)))
        .unwrap()
}

#[test]
fn noise_free_quadratic_converges_quickly() {
    let problem = quadratic(6);
    for kind in [TestKind::Norm, TestKind::Ipqn] {
        let mut cfg = SolverConfig::for_problem(&problem, kind);
        cfg.gap_tol = Some(1e-10);
        let rec = run_fd_lbfgs(&problem, &cfg, 0.0).unwrap();
        assert!(matches!(rec.meta.status, Status::Converged | Status::Stationary), "{:?}", rec.meta.status);
        assert!(rec.final_gap() <= 1e-10, "gap {}", rec.final_gap());
        assert!(rec.rows.len() <= 30, "{} iterations", rec.rows.len());
    }
}

#[test]
fn runs_replay_exactly() {
    let problem = Problem::from_name("heart8ls", NoiseModel::Absolute { sigma: 1e-3 }, 0).unwrap();
    let mut cfg = SolverConfig::for_problem(&problem, TestKind::Ipqn).with_seed(9);
    cfg.max_evals = 10_000;
    let a = run_fd_lbfgs(&problem, &cfg, 0.0).unwrap();
    let b = run_fd_lbfgs(&problem, &cfg, 0.0).unwrap();
    assert_eq!(a, b);
    let c = run_fd_lbfgs(&problem, &cfg.clone().with_seed(10), 0.0).unwrap();
    assert_ne!(a.rows, c.rows);
}

#[test]
fn sample_sizes_never_shrink_and_budget_holds() {
    for name in ["osborne", "bdqrtic", "cube"] {
        let problem = Problem::from_name(name, NoiseModel::Absolute { sigma: 1e-2 }, 0).unwrap();
        for kind in [TestKind::Norm, TestKind::Ipqn] {
            let mut cfg = SolverConfig::for_problem(&problem, kind).with_seed(2);
            cfg.max_evals = 20_000;
            let rec = run_fd_lbfgs(&problem, &cfg, 0.0).unwrap();
            assert!(rec.rows.windows(2).all(|w| w[0].batch <= w[1].batch), "{name}");
            assert!(rec.rows.windows(2).all(|w| w[0].evals < w[1].evals), "{name}");
            assert!(rec.total_evals() <= cfg.max_evals, "{name}");
            assert!(rec.rows.iter().all(|r| r.batch <= cfg.policy.cap));
        }
    }
}

#[test]
fn sample_size_grows_near_the_noise_floor() {
    let problem = multiplicative_quadratic(4, 0.1);
    let mut cfg = SolverConfig::for_problem(&problem, TestKind::Norm).with_seed(4);
    cfg.max_evals = 200_000;
    let rec = run_fd_lbfgs(&problem, &cfg, 0.0).unwrap();
    let last = rec.rows.last().unwrap();
    assert!(last.batch > cfg.policy.initial_size, "batch {}", last.batch);
    assert!(rec.final_gap() < 1e-3, "gap {}", rec.final_gap());
}

#[test]
fn nonsmooth_instance_makes_progress() {
    let problem = Problem::l1rand(1, 10).unwrap();
    let cfg = SolverConfig { max_evals: 50_000, ..SolverConfig::for_problem(&problem, TestKind::Ipqn) };
    let rec = run_fd_lbfgs(&problem, &cfg, 5.0).unwrap();
    assert!(rec.final_gap() < 0.1 * rec.meta.initial_gap(), "{} -> {}", rec.meta.initial_gap(), rec.final_gap());
}

#[test]
fn baselines_descend_with_a_small_step() {
    let problem = quadratic(5);
    for method in [BaselineMethod::FdSg, BaselineMethod::SsSg] {
        let cfg = BaselineConfig { alpha0: 0.1, max_evals: 5_000, run_seed: 3, ..Default::default() };
        let rec = run_baseline(&problem, method, &cfg, 0.0).unwrap();
        assert_eq!(rec.meta.method, method.as_str());
        assert!(rec.final_gap() < 1e-3 * rec.meta.initial_gap(), "{method:?}: {}", rec.final_gap());
        assert!(rec.total_evals() <= 5_000);
        assert!(rec.diagnostics.is_empty());
    }
}

#[test]
fn baseline_with_huge_step_diverges() {
    let problem = quadratic(5);
    // One step lands near 1e301 and the next value overflows.
    let cfg = BaselineConfig { alpha0: 2f64.powi(1000), max_evals: 5_000, ..Default::default() };
    let rec = run_baseline(&problem, BaselineMethod::FdSg, &cfg, 0.0).unwrap();
    assert_eq!(rec.meta.status, Status::Diverged);
}

#[test]
fn tuning_on_one_point_returns_it() {
    let problem = quadratic(3);
    let base = BaselineConfig { max_evals: 500, ..Default::default() };
    let r = tune_baseline(&problem, BaselineMethod::FdSg, &[-3], &[1, 2], &base, 0.0).unwrap();
    assert_eq!(r.best.j, -3);
    assert_eq!(r.grid.len(), 1);
    assert_eq!(r.records.len(), 2);
    assert!(tune_baseline(&problem, BaselineMethod::FdSg, &[], &[1], &base, 0.0).is_err());
}

#[test]
fn tuning_ties_go_to_the_smaller_step() {
    // Every step overflows, so all points tie at infinity.
    let problem = quadratic(3);
    let base = BaselineConfig { max_evals: 500, ..Default::default() };
    let r = tune_baseline(&problem, BaselineMethod::FdSg, &[1002, 1000, 1001], &[1], &base, 0.0).unwrap();
    assert!(r.grid.iter().all(|p| p.mean_final_gap == f64::INFINITY));
    assert_eq!(r.best.j, 1000);
    assert_eq!(r.grid.iter().map(|p| p.j).collect::<Vec<_>>(), vec![1000, 1001, 1002]);
}

#[test]
fn tuning_on_unit_quadratic_picks_a_step_near_one() {
    // Unit curvature: step 1 solves in one iteration; the budget allows six.
    let problem = unit_quadratic(4);
    let base = BaselineConfig { max_evals: 60, ..Default::default() };
    let grid: Vec<i32> = (-6..=3).collect();
    let r = tune_baseline(&problem, BaselineMethod::FdSg, &grid, &[1, 2, 3], &base, 0.0).unwrap();
    assert_eq!(r.best.j, 0, "grid {:?}", r.grid);
}
