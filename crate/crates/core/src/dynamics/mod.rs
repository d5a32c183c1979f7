//! Continuous-time smooth best-response dynamics with the true model
//! (SBRD) or a progressively learned one (MBRD), integrated at a fixed step.

mod integrate;
mod policy;

pub use integrate::{integrate, Method, OdeSystem};
pub use policy::{LambdaPolicy, LambdaRule, RateFunction, DEFAULT_LAMBDA_FLOOR};

use crate::auxiliary::AuxiliaryContext;
use crate::error::{Error, Result};
use crate::game::{classify, JointActionSpace, PayoffModel, StochasticGame};
use crate::metrics::{standard_columns, standard_metrics, Snapshot};
use crate::profile::{ContinuationValues, StationaryProfile, ValueMode};
use crate::regularizers::{ArgmaxOptions, RegularizerKind, Temperature};
use crate::scalar::Scalar;
use crate::trace::Trace;

/// Tolerance of the post-step simplex guard.
pub const SIMPLEX_GUARD_TOLERANCE: f64 = 1e-9;

/// Continuous model estimate: reward and transition tensors laid out like
/// the game's.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousEstimate<T> {
    num_states: usize,
    space: JointActionSpace,
    discount: T,
    /// `[player][state][joint]`.
    pub rewards: Vec<T>,
    /// `[state][joint][next]`.
    pub transitions: Vec<T>,
}

impl<T: Scalar> ContinuousEstimate<T> {
    /// Zero rewards and uniform transitions.
    pub fn uninformed(game: &StochasticGame<T>) -> Self {
        let s = game.num_states();
        Self {
            num_states: s,
            space: game.joint_actions().clone(),
            discount: game.discount(),
            rewards: vec![T::zero(); game.rewards_flat().len()],
            transitions: vec![T::one() / T::lit(s as f64); game.transitions_flat().len()],
        }
    }

    pub fn from_truth(game: &StochasticGame<T>) -> Self {
        Self {
            num_states: game.num_states(),
            space: game.joint_actions().clone(),
            discount: game.discount(),
            rewards: game.rewards_flat().to_vec(),
            transitions: game.transitions_flat().to_vec(),
        }
    }

    pub fn transition_error(&self, game: &StochasticGame<T>) -> T {
        max_abs_diff(&self.transitions, game.transitions_flat())
    }

    pub fn reward_error(&self, game: &StochasticGame<T>) -> T {
        max_abs_diff(&self.rewards, game.rewards_flat())
    }
}

fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

impl<T: Scalar> PayoffModel<T> for ContinuousEstimate<T> {
    fn num_states(&self) -> usize {
        self.num_states
    }

    fn joint_actions(&self) -> &JointActionSpace {
        &self.space
    }

    fn discount(&self) -> T {
        self.discount
    }

    #[inline]
    fn reward(&self, player: usize, state: usize, joint: usize) -> T {
        self.rewards[(player * self.num_states + state) * self.space.size() + joint]
    }

    #[inline]
    fn transition(&self, state: usize, joint: usize) -> &[T] {
        let off = (state * self.space.size() + joint) * self.num_states;
        &self.transitions[off..off + self.num_states]
    }
}

/// State of the continuous-time system. A derivative has the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousState<T> {
    pub time: T,
    pub profile: StationaryProfile<T>,
    pub values: ContinuationValues<T>,
    /// Learned model, present for MBRD.
    pub estimate: Option<ContinuousEstimate<T>>,
}

impl<T: Scalar> ContinuousState<T> {
    /// Uniform profile and zero values stored per the game's class, with an
    /// uninformed estimate when `model_free`.
    pub fn initial(game: &StochasticGame<T>, model_free: bool) -> Self {
        let mode = ValueMode::for_class(&classify(game));
        Self {
            time: T::zero(),
            profile: StationaryProfile::uniform(game.num_states(), game.action_counts()),
            values: ContinuationValues::zeros(mode, game.num_players(), game.num_states()),
            estimate: model_free.then(|| ContinuousEstimate::uninformed(game)),
        }
    }

    /// Number of scalars in the flat layout.
    pub fn dim(&self) -> usize {
        let values: usize = self.values.tables().iter().map(Vec::len).sum();
        let profile: usize = self
            .profile
            .as_nested()
            .iter()
            .flatten()
            .map(Vec::len)
            .sum();
        let est = self
            .estimate
            .as_ref()
            .map_or(0, |e| e.rewards.len() + e.transitions.len());
        values + profile + est
    }

    /// Flat layout: value tables, profile blocks, then estimated rewards
    /// and transitions.
    pub fn to_vec(&self) -> Vec<T> {
        let mut y = Vec::with_capacity(self.dim());
        for t in self.values.tables() {
            y.extend_from_slice(t);
        }
        for block in self.profile.as_nested().iter().flatten() {
            y.extend_from_slice(block);
        }
        if let Some(e) = &self.estimate {
            y.extend_from_slice(&e.rewards);
            y.extend_from_slice(&e.transitions);
        }
        y
    }

    /// Overwrites the state from a flat vector produced by [`Self::to_vec`].
    pub fn load(&mut self, time: T, y: &[T]) {
        self.time = time;
        let mut k = 0;
        for t in 0..self.values.num_tables() {
            for v in self.values.table_mut(t) {
                *v = y[k];
                k += 1;
            }
        }
        for s in 0..self.profile.num_states() {
            for block in self.profile.at_mut(s) {
                for p in block.iter_mut() {
                    *p = y[k];
                    k += 1;
                }
            }
        }
        if let Some(e) = &mut self.estimate {
            for v in e.rewards.iter_mut().chain(e.transitions.iter_mut()) {
                *v = y[k];
                k += 1;
            }
        }
    }

    /// Ranges of the profile blocks inside the flat layout.
    fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut k: usize = self.values.tables().iter().map(Vec::len).sum();
        let mut out = Vec::new();
        for block in self.profile.as_nested().iter().flatten() {
            out.push(k..k + block.len());
            k += block.len();
        }
        out
    }
}

/// Parameters shared by both vector fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsConfig<T> {
    pub temperature: Temperature<T>,
    pub regularizer: RegularizerKind,
    pub rate: RateFunction<T>,
    pub lambda: LambdaPolicy<T>,
    pub options: ArgmaxOptions<T>,
}

impl<T: Scalar> DynamicsConfig<T> {
    pub fn new(
        temperature: Temperature<T>,
        rate: RateFunction<T>,
        lambda: LambdaPolicy<T>,
    ) -> Self {
        Self {
            temperature,
            regularizer: RegularizerKind::Entropy,
            rate,
            lambda,
            options: ArgmaxOptions::default(),
        }
    }
}

/// `u̇ = β(t)(Γ − u)` and `ẋ = λ(t)(br − x)` against `model`; returns the
/// best responses per state alongside.
fn value_and_profile_rhs<T: Scalar, M: PayoffModel<T> + ?Sized>(
    cs: &ContinuousState<T>,
    model: &M,
    cfg: &DynamicsConfig<T>,
) -> Result<(ContinuousState<T>, Vec<Vec<Vec<T>>>)> {
    let mut ctx = AuxiliaryContext::new(model, &cs.values, cfg.temperature, &cfg.regularizer);
    ctx.options = cfg.options;
    let t = cs.time;
    let beta_t = cfg.rate.rate(t);
    let mut d = ContinuousState {
        time: T::one(),
        profile: cs.profile.clone(),
        values: cs.values.clone(),
        estimate: None,
    };
    for k in 0..cs.values.num_tables() {
        for s in 0..model.num_states() {
            let gamma = ctx.regularized_payoff(k, s, cs.profile.at(s));
            d.values.table_mut(k)[s] = beta_t * (gamma - cs.values.table(k)[s]);
        }
    }
    let mut responses = Vec::with_capacity(model.num_states());
    for s in 0..model.num_states() {
        let lam = cfg.lambda.rate(s, t);
        let xs = cs.profile.at(s);
        let mut brs = Vec::with_capacity(xs.len());
        for i in 0..xs.len() {
            brs.push(ctx.smooth_best_response(i, s, xs)?);
        }
        for (i, block) in d.profile.at_mut(s).iter_mut().enumerate() {
            for (a, v) in block.iter_mut().enumerate() {
                *v = lam * (brs[i][a] - xs[i][a]);
            }
        }
        responses.push(brs);
    }
    Ok((d, responses))
}

/// Time derivative of the smooth best-response dynamics with the true model.
pub fn sbrd_rhs<T: Scalar>(
    cs: &ContinuousState<T>,
    game: &StochasticGame<T>,
    cfg: &DynamicsConfig<T>,
) -> Result<ContinuousState<T>> {
    value_and_profile_rhs(cs, game, cfg).map(|(d, _)| d)
}

/// Time derivative of the dynamics with a learned model. Estimates at
/// `(s, b)` relax toward the truth at rate `λ_s(t) x̃_s(b)`, where `x̃_s` is
/// the product of the current smooth best responses.
pub fn mbrd_rhs<T: Scalar>(
    cs: &ContinuousState<T>,
    game: &StochasticGame<T>,
    cfg: &DynamicsConfig<T>,
) -> Result<ContinuousState<T>> {
    let est = cs
        .estimate
        .as_ref()
        .ok_or_else(|| Error::Precondition("learned-model dynamics need an estimate".into()))?;
    let (mut d, responses) = value_and_profile_rhs(cs, est, cfg)?;
    let space = game.joint_actions();
    let m = space.size();
    let n = game.num_players();
    let s_count = game.num_states();
    let mut rewards = vec![T::zero(); est.rewards.len()];
    let mut transitions = vec![T::zero(); est.transitions.len()];
    let mut weights = Vec::new();
    for s in 0..s_count {
        let lam = cfg.lambda.rate(s, cs.time);
        space.product_weights(&responses[s], &mut weights);
        for (b, &w) in weights.iter().enumerate() {
            let speed = lam * w;
            for i in 0..n {
                let k = (i * s_count + s) * m + b;
                rewards[k] = speed * (game.rewards_flat()[k] - est.rewards[k]);
            }
            let off = (s * m + b) * s_count;
            for t in 0..s_count {
                transitions[off + t] =
                    speed * (game.transitions_flat()[off + t] - est.transitions[off + t]);
            }
        }
    }
    d.estimate = Some(ContinuousEstimate {
        num_states: est.num_states,
        space: est.space.clone(),
        discount: est.discount,
        rewards,
        transitions,
    });
    Ok(d)
}

/// Which vector field to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    TrueModel,
    LearnedModel,
}

/// The dynamics as a flat ODE with the simplex guard.
pub struct SmoothDynamics<'a, T: Scalar> {
    pub game: &'a StochasticGame<T>,
    pub config: DynamicsConfig<T>,
    pub field: Field,
    template: ContinuousState<T>,
    blocks: Vec<std::ops::Range<usize>>,
}

impl<'a, T: Scalar> SmoothDynamics<'a, T> {
    pub fn new(
        game: &'a StochasticGame<T>,
        config: DynamicsConfig<T>,
        template: &ContinuousState<T>,
    ) -> Result<Self> {
        config.rate.validate()?;
        config.lambda.validate()?;
        let field = if template.estimate.is_some() {
            Field::LearnedModel
        } else {
            Field::TrueModel
        };
        Ok(Self {
            game,
            config,
            field,
            blocks: template.block_ranges(),
            template: template.clone(),
        })
    }

    pub fn derivative(&self, cs: &ContinuousState<T>) -> Result<ContinuousState<T>> {
        match self.field {
            Field::TrueModel => sbrd_rhs(cs, self.game, &self.config),
            Field::LearnedModel => mbrd_rhs(cs, self.game, &self.config),
        }
    }

    pub fn unpack(&self, t: T, y: &[T]) -> ContinuousState<T> {
        let mut cs = self.template.clone();
        cs.load(t, y);
        cs
    }

    /// Integrates from `initial` to `t_end`, recording `observe(state)`
    /// every `cadence` steps. Returns the final state and the trace.
    pub fn run<F>(
        &self,
        initial: &ContinuousState<T>,
        t_end: T,
        h: T,
        method: Method,
        cadence: usize,
        columns: Vec<String>,
        mut observe: F,
    ) -> Result<(ContinuousState<T>, Trace<T>)>
    where
        F: FnMut(&ContinuousState<T>) -> Result<Vec<T>>,
    {
        if cadence == 0 {
            return Err(Error::Precondition(
                "metric cadence must be positive".into(),
            ));
        }
        let mut trace = Trace::new("t", columns);
        let y = integrate(
            self,
            &initial.to_vec(),
            initial.time,
            t_end,
            h,
            method,
            |k, t, y| {
                if k % cadence == 0 {
                    let cs = self.unpack(t, y);
                    trace.push(t.to_f64_lossy(), observe(&cs)?);
                }
                Ok(())
            },
        )?;
        Ok((self.unpack(t_end, &y), trace))
    }

    pub fn columns(&self) -> Vec<String> {
        standard_columns(
            self.game.num_states(),
            self.template.values.mode(),
            self.template.values.num_tables(),
            self.field == Field::LearnedModel,
        )
    }

    /// Standard metrics measured against the true game.
    pub fn metrics(&self, cs: &ContinuousState<T>) -> Result<Vec<T>> {
        let snap = Snapshot {
            profile: &cs.profile,
            values: &cs.values,
            model_errors: cs
                .estimate
                .as_ref()
                .map(|e| (e.transition_error(self.game), e.reward_error(self.game))),
            value_rate: self.config.rate.rate(cs.time),
        };
        standard_metrics(
            self.game,
            self.config.temperature,
            &self.config.regularizer,
            &self.config.options,
            &snap,
        )
    }

    /// [`SmoothDynamics::run`] with the standard metric schema.
    pub fn run_standard(
        &self,
        initial: &ContinuousState<T>,
        t_end: T,
        h: T,
        method: Method,
        cadence: usize,
    ) -> Result<(ContinuousState<T>, Trace<T>)> {
        self.run(initial, t_end, h, method, cadence, self.columns(), |cs| {
            self.metrics(cs)
        })
    }
}

impl<T: Scalar> OdeSystem<T> for SmoothDynamics<'_, T> {
    fn dim(&self) -> usize {
        self.template.dim()
    }

    fn rhs(&self, t: T, y: &[T], dy: &mut [T]) -> Result<()> {
        let cs = self.unpack(t, y);
        let d = self.derivative(&cs)?;
        dy.copy_from_slice(&d.to_vec());
        Ok(())
    }

    /// Clamps and renormalizes profile blocks that left the simplex by at
    /// most [`SIMPLEX_GUARD_TOLERANCE`]; larger excursions are errors.
    fn post_step(&self, t: T, y: &mut [T]) -> Result<()> {
        let tol = T::lit(SIMPLEX_GUARD_TOLERANCE);
        for range in &self.blocks {
            let block = &mut y[range.clone()];
            let sum: T = block.iter().copied().sum();
            let min = block.iter().copied().fold(T::infinity(), T::min);
            if min < -tol || (sum - T::one()).abs() > tol {
                return Err(Error::SimplexViolation(format!(
                    "block at {range:?} has min {min} and sum {sum} at t = {t}"
                )));
            }
            if min < T::zero() || sum != T::one() {
                let mut total = T::zero();
                for v in block.iter_mut() {
                    *v = v.max(T::zero());
                    total += *v;
                }
                for v in block.iter_mut() {
                    *v /= total;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::matching_pennies;
    use crate::oracles::{zs_regularized_value_iteration, OracleTolerances};
    use crate::regularizers::Entropy;

    fn config(rate: RateFunction<f64>, rule: LambdaRule<f64>) -> DynamicsConfig<f64> {
        DynamicsConfig::new(
            Temperature::new(0.1).unwrap(),
            rate,
            LambdaPolicy::new(0.2, rule).unwrap(),
        )
    }

    #[test]
    fn frozen_profile_relaxes_exponentially() {
        // One player, one action, reward c, self loop: u̇ = β̄((1−δ)c + δu − u).
        let g = StochasticGame::new(1, &[1], 0.5, vec![0.8], vec![1.0]).unwrap();
        let cfg = config(RateFunction::Constant { rate: 0.5 }, LambdaRule::Floor);
        let cs = ContinuousState::initial(&g, false);
        let d = sbrd_rhs(&cs, &g, &cfg).unwrap();
        assert_eq!(d.profile.at(0)[0][0], 0.0);
        let sys = SmoothDynamics::new(&g, cfg, &cs).unwrap();
        let (end, _) = sys.run_standard(&cs, 10.0, 0.01, Method::Rk4, 100).unwrap();
        // Effective rate β̄(1−δ) toward c.
        let want = 0.8 * (1.0 - (-0.25f64 * 10.0).exp());
        assert!((end.values.get(0, 0) - want).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_has_zero_derivative() {
        let g = matching_pennies();
        let beta = Temperature::new(0.1).unwrap();
        let oracle =
            zs_regularized_value_iteration(&g, beta, &Entropy, OracleTolerances::default())
                .unwrap();
        let cs = ContinuousState {
            time: 0.0,
            profile: oracle.profile,
            values: oracle.values,
            estimate: None,
        };
        let d = sbrd_rhs(&cs, &g, &config(RateFunction::Harmonic, LambdaRule::One)).unwrap();
        assert!(d.to_vec().iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn lambda_scales_profile_derivative() {
        let g = matching_pennies();
        let mut cs = ContinuousState::initial(&g, false);
        cs.profile.at_mut(0)[0] = vec![0.9, 0.1];
        let one = sbrd_rhs(&cs, &g, &config(RateFunction::Harmonic, LambdaRule::One)).unwrap();
        let floor = sbrd_rhs(&cs, &g, &config(RateFunction::Harmonic, LambdaRule::Floor)).unwrap();
        for (a, b) in one
            .profile
            .at(0)
            .iter()
            .flatten()
            .zip(floor.profile.at(0).iter().flatten())
        {
            assert!((b - 0.2 * a).abs() < 1e-15);
        }
        assert_eq!(one.values, floor.values);
    }

    #[test]
    fn truthful_estimate_is_stationary() {
        let g = matching_pennies();
        let mut cs = ContinuousState::initial(&g, true);
        cs.estimate = Some(ContinuousEstimate::from_truth(&g));
        let cfg = config(RateFunction::Harmonic, LambdaRule::Floor);
        let d = mbrd_rhs(&cs, &g, &cfg).unwrap();
        let e = d.estimate.as_ref().unwrap();
        assert!(e.rewards.iter().chain(&e.transitions).all(|&v| v == 0.0));
        let plain = sbrd_rhs(
            &ContinuousState {
                estimate: None,
                ..cs.clone()
            },
            &g,
            &cfg,
        )
        .unwrap();
        assert_eq!(plain.values, d.values);
        assert_eq!(plain.profile, d.profile);
    }

    #[test]
    fn single_joint_action_estimate_relaxes_at_unit_rate() {
        let g = crate::game::fixtures::swap_chain();
        let cs = ContinuousState::initial(&g, true);
        let cfg = config(RateFunction::Harmonic, LambdaRule::One);
        let sys = SmoothDynamics::new(&g, cfg, &cs).unwrap();
        let (end, _) = sys.run_standard(&cs, 3.0, 0.01, Method::Rk4, 100).unwrap();
        let err = end.estimate.unwrap().transition_error(&g);
        assert!((err - 0.5 * (-3f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn layout_round_trips() {
        let g = matching_pennies();
        let mut cs = ContinuousState::initial(&g, true);
        cs.values.table_mut(0)[0] = 0.25;
        cs.profile.at_mut(0)[1] = vec![0.3, 0.7];
        let y = cs.to_vec();
        assert_eq!(y.len(), cs.dim());
        let mut back = ContinuousState::initial(&g, true);
        back.load(0.0, &y);
        assert_eq!(back, cs);
    }

    #[test]
    fn guard_rejects_large_excursions() {
        let g = matching_pennies();
        let cs = ContinuousState::initial(&g, false);
        let sys = SmoothDynamics::new(&g, config(RateFunction::Harmonic, LambdaRule::Floor), &cs)
            .unwrap();
        let mut y = cs.to_vec();
        y[1] = -1e-3;
        y[2] = 1.001;
        assert!(matches!(
            sys.post_step(0.0, &mut y),
            Err(Error::SimplexViolation(_))
        ));
        let mut y = cs.to_vec();
        y[1] = -1e-12;
        y[2] = 1.0 + 1e-12;
        sys.post_step(0.0, &mut y).unwrap();
        assert!(y[1] == 0.0 && (y[1] + y[2] - 1.0).abs() < 1e-15);
    }
}
