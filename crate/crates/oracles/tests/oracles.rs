use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zoqn::crn::{draw_set, realize_noise, NoiseDist, SampleId};
use zoqn::gradients::GradientEstimate;
use zoqn::lbfgs::{LbfgsMemory, PairRule};
use zoqn::sampling::{evaluate_test, TestKind};
use zoqn_oracles::*;

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Pairs with `y = A s` for a random SPD `A`, so every pair has positive
/// curvature.
fn random_memory(rng: &mut ChaCha8Rng, d: usize, m: usize, count: usize) -> LbfgsMemory {
    let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let a = &b * b.transpose() + DMatrix::identity(d, d) * 0.5;
    let mut memory = LbfgsMemory::new(m, PairRule::default()).unwrap();
    for _ in 0..count {
        let s = random_vec(rng, d);
        let y: Vec<f64> = (&a * nalgebra::DVector::from_column_slice(&s)).iter().copied().collect();
        memory.try_store(&s, &y).unwrap();
    }
    memory
}

#[test]
fn dense_h_of_empty_memory_is_identity() {
    assert_eq!(dense_h(&[], 3), DMatrix::identity(3, 3));
}

#[test]
fn dense_h_with_equal_s_and_y_is_identity() {
    let h = dense_h(&[(vec![1.0, 0.0], vec![1.0, 0.0])], 2);
    assert!((h - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-15);
}

#[test]
fn dense_h_is_symmetric_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2, 5, 10] {
        let memory = random_memory(&mut rng, d, 5, 8);
        let h = dense_h_from_memory(&memory, d);
        assert!((&h - h.transpose()).abs().max() <= 1e-10 * h.abs().max());
        let eig = SymmetricEigen::new(h);
        assert!(eig.eigenvalues.iter().all(|&l| l > 0.0), "{:?}", eig.eigenvalues);
    }
}

#[test]
fn two_loop_matches_dense_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [2, 5, 10] {
        for m in [1, 3, 10] {
            let memory = random_memory(&mut rng, d, m, 12);
            let h = dense_h_from_memory(&memory, d);
            let g = random_vec(&mut rng, d);
            let dense = &h * nalgebra::DVector::from_column_slice(&g);
            let fast = memory.two_loop(&g);
            let err: f64 = fast.iter().zip(dense.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err <= 1e-10 * dense.norm(), "d={d} m={m} err={err}");
        }
    }
}

fn estimate(rows: Vec<Vec<f64>>) -> GradientEstimate {
    let n = rows.len();
    GradientEstimate {
        mean: naive_mean(&rows),
        per_sample: rows,
        nu: 1e-8,
        sample: draw_set(0, n, 0).unwrap().0,
        base_values: vec![0.0; n],
    }
}

fn agree_within_rounding(kind: TestKind, rows: &[Vec<f64>], memory: &LbfgsMemory, h: &DMatrix<f64>, theta: f64) -> bool {
    let fast = evaluate_test(kind, &estimate(rows.to_vec()), memory, theta).unwrap();
    let lhs = fast.variance / rows.len() as f64;
    let rhs = theta * theta * fast.rhs;
    if (lhs - rhs).abs() <= 1e-9 * rhs.max(lhs) {
        // Too close to the boundary for two rounding paths to be compared.
        return true;
    }
    fast.satisfied == brute_force_test(rows, h, theta, kind)
}

#[test]
fn brute_force_verdicts_match_library() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut satisfied = [0usize; 2];
    for trial in 0..1000 {
        let d = rng.random_range(1..6);
        let n = rng.random_range(2..12);
        let center = random_vec(&mut rng, d);
        let spread = rng.random_range(0.01..3.0);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| center.iter().map(|c| c + spread * rng.random_range(-1.0..1.0)).collect())
            .collect();
        let memory = random_memory(&mut rng, d, 3, trial % 4);
        let h = dense_h_from_memory(&memory, d);
        let theta = rng.random_range(0.1..1.0);
        for (k, kind) in [TestKind::Norm, TestKind::Ipqn].into_iter().enumerate() {
            assert!(agree_within_rounding(kind, &rows, &memory, &h, theta), "trial {trial} {kind:?}");
            satisfied[k] += brute_force_test(&rows, &h, theta, kind) as usize;
        }
    }
    assert!(satisfied.iter().all(|&s| s > 50 && s < 950), "{satisfied:?}");
}

#[test]
fn zero_variance_satisfies_and_two_samples_work() {
    let h = DMatrix::identity(2, 2);
    let rows = vec![vec![1.0, 2.0]; 3];
    assert!(brute_force_test(&rows, &h, 0.5, TestKind::Norm));
    assert!(brute_force_test(&rows, &h, 0.5, TestKind::Ipqn));
    let rows = vec![vec![1.0], vec![3.0]];
    assert_eq!(brute_force_norm_variance(&rows), 2.0);
    assert!(brute_force_test(&rows, &DMatrix::identity(1, 1), 0.9, TestKind::Norm));
    assert!(!brute_force_test(&rows, &DMatrix::identity(1, 1), 0.3, TestKind::Norm));
}

#[test]
fn ipqn_variance_matches_dense_definition_with_one_pair() {
    let mut memory = LbfgsMemory::new(5, PairRule::default()).unwrap();
    memory.try_store(&[1.0, 0.2, -0.3], &[2.0, 0.1, -0.2]).unwrap();
    let rows = vec![vec![1.0, 2.0, 0.5], vec![0.3, -1.0, 2.0], vec![1.5, 0.5, 0.0], vec![-0.2, 0.4, 1.1]];
    let fast = zoqn::gradients::ipqn_variance(&estimate(rows.clone()), &memory).unwrap();
    let brute = brute_force_ipqn_variance(&rows, &dense_h_from_memory(&memory, 3));
    assert!((fast - brute).abs() <= 1e-10 * brute, "{fast} vs {brute}");
}

#[test]
fn monte_carlo_of_constant() {
    let est = monte_carlo_mean(|_, _| 4.0, 100, 0);
    assert_eq!((est.mean, est.stderr), (4.0, 0.0));
}

#[test]
fn monte_carlo_of_uniform_absolute_value() {
    let f = |seed, i| realize_noise(SampleId::new(seed, i), 1, NoiseDist::Uniform)[0].abs();
    let est = monte_carlo_mean(f, 1_000_000, 5);
    assert!(est.within(0.5, 4.0), "{est:?}");
    assert_eq!(est, monte_carlo_mean(f, 1_000_000, 5));
}

#[test]
fn difference_gradients_on_a_cubic() {
    let f = |x: &[f64]| x[0].powi(3) + 2.0 * x[1];
    let c = central_difference_gradient(f, &[1.0, 0.0], 1e-5);
    assert!((c[0] - 3.0).abs() < 1e-8 && (c[1] - 2.0).abs() < 1e-8);
    let fwd = forward_difference_gradient(f, &[1.0, 0.0], 1e-6);
    assert!((fwd[0] - 3.0).abs() < 1e-5);
}
