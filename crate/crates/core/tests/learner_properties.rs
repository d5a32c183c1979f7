mod common;

use common::{beta, generated, rng};
use sfp_core::game::{GameClass, NoiseSpec, PayoffModel, StochasticGame};
use sfp_core::learners::{Algorithm, Learner, LearnerState, ModelEstimate, Schedule};
use sfp_core::profile::ValueMode;
use sfp_core::regularizers::{Entropy, Regularizer};

fn log_max_actions(game: &StochasticGame<f64>) -> f64 {
    Regularizer::<f64>::max_value(&Entropy, game.max_action_count())
}

/// Runs `steps` steps, checking the profile and value invariants after each.
fn check_invariants(
    game: &StochasticGame<f64>,
    algorithm: Algorithm,
    steps: u64,
    seed: u64,
) -> f64 {
    let b = 0.1;
    let learner = Learner::new(algorithm, beta(b)).with_noise(NoiseSpec::Gaussian { sigma: 0.1 });
    let mut st = learner
        .initial_state(game, Schedule::default(), 0, rng(seed))
        .unwrap();
    // Provable for convex-combination updates from zero: every target is
    // at most (1−δ) + δ‖u‖ + β Σ_j log|A^j| in size.
    let total_log: f64 = game
        .action_counts()
        .iter()
        .map(|&n| Regularizer::<f64>::max_value(&Entropy, n))
        .sum();
    let model_bound =
        |est_rewards: f64| (est_rewards + b * total_log / (1.0 - game.discount())) * (1.0 + 1e-12);
    let mut largest = 0.0f64;
    let mut max_reward_seen = 1.0f64;
    for n in 1..=steps {
        learner.step(&mut st, game).unwrap();
        if st.values.mode() == ValueMode::ZeroSum {
            for s in 0..game.num_states() {
                assert_eq!(st.values.get(1, s), -st.values.get(0, s));
            }
        }
        if let Some(est) = &st.estimate {
            if n % 1_000 == 0 {
                let r = (0..game.num_players())
                    .flat_map(|i| {
                        (0..game.num_states()).flat_map(move |s| {
                            (0..game.joint_actions().size()).map(move |a| (i, s, a))
                        })
                    })
                    .map(|(i, s, a)| sfp_core::game::PayoffModel::reward(est, i, s, a).abs())
                    .fold(1.0f64, f64::max);
                max_reward_seen = max_reward_seen.max(r);
            }
        }
        let norm = st.values.sup_norm();
        largest = largest.max(norm);
        if n % 10_000 == 0 || n == steps {
            assert!(
                st.profile.simplex_defect() <= 1e-12,
                "step {n}: defect {}",
                st.profile.simplex_defect()
            );
            assert!(
                largest <= model_bound(max_reward_seen),
                "step {n}: {largest}"
            );
        }
    }
    largest
}

#[test]
fn profiles_stay_on_the_simplex_and_values_bounded_over_a_million_steps() {
    let cases = [
        (GameClass::ZeroSum, Algorithm::Sfp),
        (GameClass::IdenticalInterest, Algorithm::Mfp),
        (GameClass::General, Algorithm::Sfp),
    ];
    for (k, (class, algorithm)) in cases.into_iter().enumerate() {
        let g = generated(3, &[2, 3], 0.5, class, 60 + k as u64);
        let largest = check_invariants(&g, algorithm, 1_000_000, k as u64);
        let bound = 1.0 + 0.1 * log_max_actions(&g);
        assert!(
            largest <= bound,
            "case {k}: ‖u‖∞ reached {largest} > {bound}"
        );
    }
}

#[test]
fn value_bound_holds_on_many_generated_games() {
    for seed in 0..20u64 {
        let class = match seed % 3 {
            0 => GameClass::ZeroSum,
            1 => GameClass::IdenticalInterest,
            _ => GameClass::General,
        };
        let g = generated(
            2 + (seed % 3) as usize,
            &[2, 2],
            0.3 + 0.03 * seed as f64,
            class,
            70 + seed,
        );
        let largest = check_invariants(&g, Algorithm::Mfp, 20_000, seed);
        assert!(
            largest <= 1.0 + 0.1 * log_max_actions(&g),
            "seed {seed}: {largest}"
        );
    }
}

/// Unvisited state/joint-action pairs of an MFP run, at each checkpoint.
fn unvisited_counts(
    game: &StochasticGame<f64>,
    b: f64,
    seed: u64,
    checkpoints: &[u64],
) -> Vec<usize> {
    let learner = Learner::new(Algorithm::Mfp, beta(b));
    let mut st = learner
        .initial_state(game, Schedule::default(), 0, rng(seed))
        .unwrap();
    let mut out = Vec::new();
    let mut done = 0;
    for &c in checkpoints {
        for _ in done..c {
            learner.step(&mut st, game).unwrap();
        }
        done = c;
        let est = st.estimate.as_ref().unwrap();
        out.push(est.visit_counts().iter().filter(|&&v| v == 0).count());
    }
    out
}

#[test]
fn every_state_action_pair_is_eventually_visited() {
    // High temperature: the response floor is large and coverage is fast.
    for seed in 0..10u64 {
        let g = generated(3, &[2, 2], 0.5, GameClass::General, 80 + seed);
        assert_eq!(
            unvisited_counts(&g, 1.0, seed, &[20_000]),
            vec![0],
            "seed {seed}"
        );
    }
    // Default temperature: coverage only improves, and most runs finish it.
    let mut covered = 0;
    for seed in 0..10u64 {
        let g = generated(3, &[2, 2], 0.5, GameClass::General, 80 + seed);
        let counts = unvisited_counts(&g, 0.1, seed, &[1_000, 10_000, 100_000, 400_000]);
        assert!(
            counts.windows(2).all(|w| w[1] <= w[0]),
            "seed {seed}: {counts:?}"
        );
        if counts[3] == 0 {
            covered += 1;
        }
    }
    assert!(covered >= 8, "{covered}/10 runs covered every pair");
}

#[test]
fn truth_seeded_mfp_follows_sfp_exactly() {
    for seed in 0..5u64 {
        let g = generated(3, &[2, 2], 0.5, GameClass::ZeroSum, 90 + seed);
        let sfp = Learner::new(Algorithm::Sfp, beta(0.1));
        let mfp = Learner::new(Algorithm::Mfp, beta(0.1)).with_noise(NoiseSpec::None);
        let mut a = sfp
            .initial_state(&g, Schedule::default(), 0, rng(seed))
            .unwrap();
        let mode = a.values.mode();
        let mut b = LearnerState::new(
            &g,
            mode,
            Schedule::default(),
            Some(ModelEstimate::seeded_from_truth(&g)),
            0,
            rng(seed),
        )
        .unwrap();
        for _ in 0..5_000 {
            sfp.step(&mut a, &g).unwrap();
            mfp.step(&mut b, &g).unwrap();
            assert_eq!(a.values, b.values);
            assert_eq!(a.profile, b.profile);
            assert_eq!(a.current_state, b.current_state);
        }
    }
}
