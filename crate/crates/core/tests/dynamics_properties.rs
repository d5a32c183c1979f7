mod common;

use common::{beta, generated};
use sfp_core::auxiliary::AuxiliaryContext;
use sfp_core::dynamics::{
    integrate, ContinuousState, DynamicsConfig, LambdaPolicy, LambdaRule, Method, RateFunction,
    SmoothDynamics,
};
use sfp_core::game::{GameClass, PayoffModel, StochasticGame};
use sfp_core::metrics::duality_gaps;
use sfp_core::oracles::{equilibrium_residuals, zs_regularized_value_iteration, OracleTolerances};
use sfp_core::regularizers::{ArgmaxOptions, Entropy, Regularizer};

fn config(rate: RateFunction<f64>, rule: LambdaRule<f64>) -> DynamicsConfig<f64> {
    DynamicsConfig::new(beta(0.1), rate, LambdaPolicy::new(0.2, rule).unwrap())
}

/// Every integration step of a run, as `(t, state)`.
fn trajectory(
    game: &StochasticGame<f64>,
    cfg: DynamicsConfig<f64>,
    model_free: bool,
    t_end: f64,
    h: f64,
) -> Vec<(f64, ContinuousState<f64>)> {
    let initial = ContinuousState::initial(game, model_free);
    let system = SmoothDynamics::new(game, cfg, &initial).unwrap();
    let mut out = vec![(0.0, initial.clone())];
    integrate(
        &system,
        &initial.to_vec(),
        0.0,
        t_end,
        h,
        Method::Rk4,
        |_, t, y| {
            out.push((t, system.unpack(t, y)));
            Ok(())
        },
    )
    .unwrap();
    out
}

#[test]
fn identical_interest_residuals_vanish_with_a_constant_rate() {
    for seed in 0..3 {
        let g = generated(3, &[2, 2], 0.5, GameClass::IdenticalInterest, 400 + seed);
        let cfg = config(RateFunction::Constant { rate: 1.0 }, LambdaRule::One);
        let initial = ContinuousState::initial(&g, false);
        let system = SmoothDynamics::new(&g, cfg, &initial).unwrap();
        let (last, _) = system
            .run_standard(&initial, 60.0, 0.01, Method::Rk4, 1_000)
            .unwrap();
        let rep = equilibrium_residuals(
            &g,
            beta(0.1),
            &Entropy,
            &ArgmaxOptions::default(),
            &last.profile,
            &last.values,
        )
        .unwrap();
        assert!(
            rep.max_value() < 1e-4,
            "seed {seed}: value residual {}",
            rep.max_value()
        );
        assert!(
            rep.max_best_response() < 1e-4,
            "seed {seed}: response residual {}",
            rep.max_best_response()
        );
    }
}

#[test]
fn state_moves_at_bounded_speed() {
    let g = generated(3, &[2, 2], 0.5, GameClass::ZeroSum, 410);
    let h = 0.01;
    for model_free in [false, true] {
        let cfg = config(
            RateFunction::Harmonic,
            LambdaRule::Sinusoidal { period: 7.0 },
        );
        let path = trajectory(&g, cfg, model_free, 20.0, h);
        // |u̇| ≤ |Γ| + |u|, |ẋ| ≤ 1 and estimate rates ≤ 2‖r‖∞ + 1 in this run.
        let log_a = Regularizer::<f64>::max_value(&Entropy, 2);
        let value_bound = 1.0 + 0.1 * 2.0 * log_a / (1.0 - g.discount());
        let lipschitz = (2.0 * value_bound).max(2.0 * g.reward_sup_norm() + 1.0);
        for w in path.windows(2) {
            let a = w[0].1.to_vec();
            let b = w[1].1.to_vec();
            let step = a
                .iter()
                .zip(&b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(step <= lipschitz * h, "t = {}: moved {step}", w[0].0);
        }
    }
}

/// `min_s (Γ_s − u_s)` for the shared table of an identical-interest game.
fn min_value_gap(game: &StochasticGame<f64>, cs: &ContinuousState<f64>) -> f64 {
    let ctx = AuxiliaryContext::new(game, &cs.values, beta(0.1), &Entropy);
    (0..game.num_states())
        .map(|s| ctx.regularized_payoff(0, s, cs.profile.at(s)) - cs.values.table(0)[s])
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn minimum_value_gap_obeys_the_one_sided_bound() {
    let h = 0.01;
    for seed in 0..3 {
        let g = generated(3, &[2, 2], 0.5, GameClass::IdenticalInterest, 420 + seed);
        let rate = RateFunction::Harmonic;
        let path = trajectory(&g, config(rate, LambdaRule::Floor), false, 50.0, h);
        let delta = g.discount();
        for w in path.windows(2) {
            let (t, ref a) = w[0];
            let m0 = min_value_gap(&g, a);
            let m1 = min_value_gap(&g, &w[1].1);
            let slope = (m1 - m0) / h;
            let floor = (delta - 1.0) * rate.rate(t) * m0;
            assert!(
                slope >= floor - 10.0 * h,
                "seed {seed}, t = {t}: slope {slope} below {floor}"
            );
        }
    }
}

/// Max over states of the duality gap, measured on the model the run uses.
fn gap_trace(game: &StochasticGame<f64>, path: &[(f64, ContinuousState<f64>)]) -> Vec<f64> {
    path.iter()
        .map(|(_, cs)| {
            let gaps = match &cs.estimate {
                Some(est) => duality_gaps(
                    est,
                    beta(0.1),
                    &Entropy,
                    &ArgmaxOptions::default(),
                    &cs.profile,
                    &cs.values,
                ),
                None => duality_gaps(
                    game,
                    beta(0.1),
                    &Entropy,
                    &ArgmaxOptions::default(),
                    &cs.profile,
                    &cs.values,
                ),
            };
            gaps.unwrap().into_iter().fold(0.0, f64::max)
        })
        .collect()
}

/// Checks that `max(w − plateau, 0)` does not increase after the first
/// tenth of the run, with the plateau taken as the largest gap over the
/// last tenth. Returns the largest per-step increase seen.
fn excess_gap_increase(gaps: &[f64]) -> f64 {
    let n = gaps.len();
    let plateau = gaps[n - n / 10..].iter().copied().fold(0.0, f64::max);
    let excess: Vec<f64> = gaps.iter().map(|w| (w - plateau).max(0.0)).collect();
    excess[n / 10..]
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

#[test]
fn zero_sum_gap_excess_is_nonincreasing_with_a_constant_rate() {
    for seed in 0..3 {
        let g = generated(2, &[2, 2], 0.5, GameClass::ZeroSum, 200 + seed);
        let cfg = config(RateFunction::Constant { rate: 0.1 }, LambdaRule::Floor);
        let path = trajectory(&g, cfg, false, 100.0, 0.01);
        let rise = excess_gap_increase(&gap_trace(&g, &path));
        assert!(rise <= 1e-6, "seed {seed}: excess gap rose by {rise}");
    }
}

#[test]
fn field_vanishes_at_the_regularized_equilibrium() {
    for seed in 0..3 {
        let g = generated(2, &[2, 2], 0.5, GameClass::ZeroSum, 430 + seed);
        let cfg = config(RateFunction::Constant { rate: 1.0 }, LambdaRule::One);
        let initial = ContinuousState::initial(&g, false);
        let system = SmoothDynamics::new(&g, cfg, &initial).unwrap();
        let away = system.derivative(&initial).unwrap().to_vec();
        assert!(
            away.iter().any(|v| v.abs() > 1e-3),
            "seed {seed}: uniform start is at rest"
        );

        let tol = OracleTolerances::default();
        let oracle = zs_regularized_value_iteration(&g, beta(0.1), &Entropy, tol).unwrap();
        let opts = ArgmaxOptions::default();
        let gap = duality_gaps(
            &g,
            beta(0.1),
            &Entropy,
            &opts,
            &oracle.profile,
            &oracle.values,
        )
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max);
        let mut rest = initial.clone();
        rest.profile = oracle.profile;
        rest.values = oracle.values;
        let speed = system
            .derivative(&rest)
            .unwrap()
            .to_vec()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        // A gap g leaves the profile within sqrt(2g/β) of the responses.
        let allowed = (2.0 * gap.max(1e-12) / 0.1).sqrt() + 1e-9;
        assert!(
            speed <= allowed,
            "seed {seed}: field {speed} at the oracle solution, allowed {allowed}"
        );
    }
}
