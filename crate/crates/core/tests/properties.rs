use proptest::prelude::*;
use zoqn::crn::{draw_set, realize_noise, NoiseDist, SampleId, SampleSource};
use zoqn::lbfgs::{LbfgsMemory, PairRule};
use zoqn::linalg::{dot, pairwise_mean};
use zoqn::problems::nonsmooth::{expected_abs_piece, expected_abs_slope};
use zoqn::sampling::ThetaState;

fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, d)
}

proptest! {
    #[test]
    fn sample_sets_are_prefix_stable(seed in any::<u64>(), n in 1usize..50, m in 1usize..50) {
        let (short, next) = draw_set(seed, n, 0).unwrap();
        let (long, _) = draw_set(seed, n + m, 0).unwrap();
        prop_assert_eq!(short.ids(), &long.ids()[..n]);
        let (tail, _) = draw_set(seed, m, next).unwrap();
        prop_assert_eq!(tail.ids(), &long.ids()[n..]);

        let mut source = SampleSource::new(seed);
        let mut drawn = source.draw(n).unwrap().ids().to_vec();
        drawn.extend_from_slice(source.draw(m).unwrap().ids());
        prop_assert_eq!(&drawn[..], long.ids());
    }

    #[test]
    fn noise_is_prefix_stable_in_dimension(seed in any::<u64>(), i in any::<u64>(), d in 1usize..40, extra in 0usize..10) {
        let id = SampleId::new(seed, i);
        for dist in [NoiseDist::Gaussian { sigma: 0.3 }, NoiseDist::Uniform] {
            let a = realize_noise(id, d, dist);
            let b = realize_noise(id, d + extra, dist);
            prop_assert_eq!(&a[..], &b[..d]);
            prop_assert_eq!(a, realize_noise(id, d, dist));
        }
    }

    #[test]
    fn uniform_noise_stays_in_range(seed in any::<u64>(), i in any::<u64>()) {
        for z in realize_noise(SampleId::new(seed, i), 64, NoiseDist::Uniform) {
            prop_assert!((-1.0..1.0).contains(&z));
        }
    }

    #[test]
    fn two_loop_direction_is_descent(
        d in 2usize..8,
        seed in any::<u64>(),
        count in 1usize..15,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut memory = LbfgsMemory::new(5, PairRule::default()).unwrap();
        for _ in 0..count {
            let s: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            memory.try_store(&s, &y).unwrap();
        }
        let g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = memory.two_loop(&g);
        prop_assert!(dot(&p, &g) > 0.0, "H must stay positive definite");
    }

    #[test]
    fn accepted_pairs_satisfy_the_rule(s in vec_strategy(4), y in vec_strategy(4)) {
        let rule = PairRule::Smooth { beta1: 1e-3, beta2: 0.0 };
        let mut memory = LbfgsMemory::new(3, rule).unwrap();
        let stored = memory.try_store(&s, &y).unwrap();
        prop_assert_eq!(stored, rule.accepts(&s, &y));
        if stored {
            prop_assert!(dot(&y, &s) > 1e-3 * dot(&s, &s));
        }
    }

    #[test]
    fn theta_replay_matches_rule(sizes in prop::collection::vec(2usize..6, 1..40), theta0 in 0.1f64..2.0, gamma in 0.05f64..0.99) {
        let mut state = ThetaState::new(theta0, gamma, 2).unwrap();
        let mut prev = 2;
        let mut expected = theta0;
        for &size in &sizes {
            expected = if size == prev { expected * gamma } else { theta0 };
            prev = size;
            prop_assert_eq!(state.update(size), expected);
        }
    }

    #[test]
    fn pairwise_mean_is_accurate(values in prop::collection::vec(-1e6f64..1e6, 1..300)) {
        let naive: f64 = values.iter().sum::<f64>() / values.len() as f64;
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        prop_assert!((pairwise_mean(&values) - naive).abs() <= 1e-12 * scale.max(1.0));
        let c = values[0];
        prop_assert!((pairwise_mean(&vec![c; values.len()]) - c).abs() <= 4.0 * f64::EPSILON * c.abs());
        prop_assert_eq!(pairwise_mean(&[c, c]), c);
    }

    #[test]
    fn abs_piece_is_convex_and_above_kink(c in -5.0f64..5.0, h in 1e-4f64..1e-2) {
        let f = expected_abs_piece;
        prop_assert!(f(c) >= c.abs());
        prop_assert!(f(c) >= 0.5);
        prop_assert!(f(c - h) + f(c + h) >= 2.0 * f(c) - 1e-12);
        let slope = (f(c + h) - f(c - h)) / (2.0 * h);
        prop_assert!((slope - expected_abs_slope(c)).abs() <= h);
    }
}

#[test]
fn abs_piece_is_continuous_at_kinks() {
    for c in [-1.0f64, 1.0] {
        let eps = 1e-12;
        let left = expected_abs_piece(c - eps);
        let right = expected_abs_piece(c + eps);
        assert!((left - right).abs() < 4e-12);
        assert_eq!(expected_abs_piece(c), 1.0);
        assert_eq!(expected_abs_slope(c), c);
    }
}
