//! Discrete-time smooth fictitious play along one simulated trajectory,
//! with a known model (SFP) or an online estimate and noisy rewards (MFP).

mod estimate;
mod schedule;

pub use estimate::ModelEstimate;
pub use schedule::{doubling_trick_update, DoublingState, Schedule, ValueRate};

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auxiliary::AuxiliaryContext;
use crate::error::{Error, Result};
use crate::game::sample::sample_index;
use crate::game::{
    classify, sample_rewards, sample_transition, NoiseSpec, PayoffModel, StochasticGame,
};
use crate::metrics::{duality_gaps, standard_columns, standard_metrics, Snapshot};
use crate::profile::{ContinuationValues, StationaryProfile, ValueMode};
use crate::regularizers::{ArgmaxOptions, RegularizerKind, Temperature};
use crate::scalar::Scalar;
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Known model.
    Sfp,
    /// Estimated model, noisy rewards.
    Mfp,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sfp => "sfp",
            Self::Mfp => "mfp",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sfp" => Ok(Self::Sfp),
            "mfp" => Ok(Self::Mfp),
            other => Err(Error::InvalidParameter(format!(
                "unknown learner `{other}` (expected sfp or mfp)"
            ))),
        }
    }
}

/// Fixed learner configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Learner<T> {
    pub algorithm: Algorithm,
    pub temperature: Temperature<T>,
    pub regularizer: RegularizerKind,
    /// Reward perturbation seen by model-free learners.
    pub noise: NoiseSpec<T>,
    pub options: ArgmaxOptions<T>,
}

impl<T: Scalar> Learner<T> {
    pub fn new(algorithm: Algorithm, temperature: Temperature<T>) -> Self {
        Self {
            algorithm,
            temperature,
            regularizer: RegularizerKind::Entropy,
            noise: NoiseSpec::None,
            options: ArgmaxOptions::default(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec<T>) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_regularizer(mut self, regularizer: RegularizerKind) -> Self {
        self.regularizer = regularizer;
        self
    }

    /// Fresh state: zero values, uniform profile, empty estimate for MFP.
    /// Values are stored per the game's class.
    pub fn initial_state(
        &self,
        game: &StochasticGame<T>,
        schedule: Schedule<T>,
        start: usize,
        rng: ChaCha8Rng,
    ) -> Result<LearnerState<T>> {
        let mode = ValueMode::for_class(&classify(game));
        let estimate = (self.algorithm == Algorithm::Mfp).then(|| ModelEstimate::new(game));
        LearnerState::new(game, mode, schedule, estimate, start, rng)
    }

    /// One step of the configured algorithm.
    pub fn step(&self, state: &mut LearnerState<T>, game: &StochasticGame<T>) -> Result<()> {
        match self.algorithm {
            Algorithm::Sfp => sfp_step(self, state, game),
            Algorithm::Mfp => mfp_step(self, state, game),
        }
    }

    /// Applies `steps` steps, recording `observe(state)` whenever the step
    /// count is a multiple of `cadence`.
    pub fn run<F>(
        &self,
        state: &mut LearnerState<T>,
        game: &StochasticGame<T>,
        steps: u64,
        cadence: u64,
        columns: Vec<String>,
        mut observe: F,
    ) -> Result<Trace<T>>
    where
        F: FnMut(&LearnerState<T>) -> Result<Vec<T>>,
    {
        if steps == 0 {
            return Err(Error::Precondition("a run needs at least one step".into()));
        }
        if cadence == 0 {
            return Err(Error::Precondition(
                "metric cadence must be positive".into(),
            ));
        }
        let mut trace = Trace::new("step", columns);
        for _ in 0..steps {
            self.step(state, game)?;
            if state.step % cadence == 0 {
                let row = observe(state)?;
                trace.push(state.step as f64, row);
            }
        }
        Ok(trace)
    }

    /// [`Learner::run`] with the standard metric schema.
    pub fn run_standard(
        &self,
        state: &mut LearnerState<T>,
        game: &StochasticGame<T>,
        steps: u64,
        cadence: u64,
    ) -> Result<Trace<T>> {
        let columns = self.columns(game, state);
        self.run(state, game, steps, cadence, columns, |st| {
            self.metrics(game, st)
        })
    }

    pub fn columns(&self, game: &StochasticGame<T>, state: &LearnerState<T>) -> Vec<String> {
        standard_columns(
            game.num_states(),
            state.values.mode(),
            state.values.num_tables(),
            self.algorithm == Algorithm::Mfp,
        )
    }

    /// Standard metrics of `state`, measured against the true game.
    pub fn metrics(&self, game: &StochasticGame<T>, state: &LearnerState<T>) -> Result<Vec<T>> {
        let model_errors = state
            .estimate
            .as_ref()
            .filter(|_| self.algorithm == Algorithm::Mfp)
            .map(|e| (e.transition_error(game), e.reward_error(game)));
        let snap = Snapshot {
            profile: &state.profile,
            values: &state.values,
            model_errors,
            value_rate: state.value_rate,
        };
        standard_metrics(
            game,
            self.temperature,
            &self.regularizer,
            &self.options,
            &snap,
        )
    }
}

/// Mutable state of one learning trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState<T> {
    pub step: u64,
    pub current_state: usize,
    /// Empirical frequencies of play at each state.
    pub profile: StationaryProfile<T>,
    pub values: ContinuationValues<T>,
    /// Learned model; required by MFP.
    pub estimate: Option<ModelEstimate<T>>,
    /// Visits per state.
    pub visits: Vec<u64>,
    pub schedule: Schedule<T>,
    pub rng: ChaCha8Rng,
    /// Value rate applied by the most recent step.
    pub value_rate: T,
    /// Joint action played by the most recent step.
    pub last_joint: Option<usize>,
}

impl<T: Scalar> LearnerState<T> {
    pub fn new(
        game: &StochasticGame<T>,
        mode: ValueMode,
        schedule: Schedule<T>,
        estimate: Option<ModelEstimate<T>>,
        start: usize,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        schedule.validate()?;
        if start >= game.num_states() {
            return Err(Error::OutOfRange {
                what: "initial state",
                index: start,
                limit: game.num_states(),
            });
        }
        if schedule.doubling().is_some() && mode != ValueMode::ZeroSum {
            return Err(Error::Precondition(
                "the doubling schedule needs zero-sum values".into(),
            ));
        }
        if mode == ValueMode::ZeroSum && game.num_players() != 2 {
            return Err(Error::InvalidDimensions(
                "zero-sum values need 2 players".into(),
            ));
        }
        Ok(Self {
            step: 0,
            current_state: start,
            profile: StationaryProfile::uniform(game.num_states(), game.action_counts()),
            values: ContinuationValues::zeros(mode, game.num_players(), game.num_states()),
            estimate,
            visits: vec![0; game.num_states()],
            rng,
            value_rate: schedule.rate(0),
            schedule,
            last_joint: None,
        })
    }

    fn rate_at(&self, state: usize) -> T {
        if self.schedule.per_visit {
            self.schedule.rate(self.visits[state])
        } else {
            self.schedule.rate(self.step)
        }
    }
}

/// One step with the true model.
pub fn sfp_step<T: Scalar>(
    learner: &Learner<T>,
    state: &mut LearnerState<T>,
    game: &StochasticGame<T>,
) -> Result<()> {
    advance(learner, state, game, false)
}

/// One step with the learned model; requires `state.estimate`.
pub fn mfp_step<T: Scalar>(
    learner: &Learner<T>,
    state: &mut LearnerState<T>,
    game: &StochasticGame<T>,
) -> Result<()> {
    advance(learner, state, game, true)
}

/// Signs of a shared reward shock that keep the realized stage game
/// zero-sum or identical-interest.
fn shock_signs<T: Scalar>(mode: ValueMode, players: usize) -> Option<Vec<T>> {
    match mode {
        ValueMode::ZeroSum => Some(vec![T::one(), -T::one()]),
        ValueMode::Shared if players > 1 => Some(vec![T::one(); players]),
        _ => None,
    }
}

fn advance<T: Scalar>(
    learner: &Learner<T>,
    st: &mut LearnerState<T>,
    game: &StochasticGame<T>,
    model_free: bool,
) -> Result<()> {
    let s = st.current_state;
    let players = game.num_players();
    let num_states = game.num_states();
    let rates: Vec<T> = (0..num_states).map(|t| st.rate_at(t)).collect();

    let (actions, updated) = {
        let model: &dyn PayoffModel<T> = if model_free {
            st.estimate
                .as_ref()
                .ok_or_else(|| Error::Precondition("model-free step without an estimate".into()))?
        } else {
            game
        };
        let mut ctx =
            AuxiliaryContext::new(model, &st.values, learner.temperature, &learner.regularizer);
        ctx.options = learner.options;

        // Actions from the pre-update values and profile.
        let xs = st.profile.at(s);
        let mut actions = Vec::with_capacity(players);
        for i in 0..players {
            let br = ctx.smooth_best_response(i, s, xs)?;
            actions.push(sample_index(&br, &mut st.rng));
        }

        // Synchronous value update over every state.
        let mut updated = st.values.clone();
        for k in 0..st.values.num_tables() {
            for (t, &rate) in rates.iter().enumerate() {
                let target = ctx.regularized_payoff(k, t, st.profile.at(t));
                let u = st.values.table(k)[t];
                updated.table_mut(k)[t] = u + rate * (target - u);
            }
        }
        (actions, updated)
    };
    st.values = updated;
    st.value_rate = rates[s];

    // Empirical frequencies at the current state only.
    let weight = T::one() / T::lit(st.visits[s] as f64 + 1.0);
    for (block, &a) in st.profile.at_mut(s).iter_mut().zip(&actions) {
        for (j, p) in block.iter_mut().enumerate() {
            let target = if j == a { T::one() } else { T::zero() };
            *p += weight * (target - *p);
        }
    }
    st.visits[s] += 1;

    let joint = game.joint_actions().encode(&actions)?;
    let mut rewards = Vec::new();
    if model_free {
        let signs = shock_signs::<T>(st.values.mode(), players);
        sample_rewards(
            game,
            &learner.noise,
            s,
            joint,
            signs.as_deref(),
            &mut st.rng,
            &mut rewards,
        )?;
    }
    let next = sample_transition(game, s, joint, &mut st.rng)?;
    if model_free {
        if let Some(est) = st.estimate.as_mut() {
            est.observe(s, joint, &rewards, next)?;
        }
    }
    st.step += 1;
    st.current_state = next;
    st.last_joint = Some(joint);

    if let Some(interval) = st.schedule.doubling().map(|d| d.check_interval) {
        if st.step % interval == 0 {
            let gap = {
                let model: &dyn PayoffModel<T> = match (&st.estimate, model_free) {
                    (Some(est), true) => est,
                    _ => game,
                };
                duality_gaps(
                    model,
                    learner.temperature,
                    &learner.regularizer,
                    &learner.options,
                    &st.profile,
                    &st.values,
                )?
                .into_iter()
                .fold(T::zero(), T::max)
            };
            if let Some(d) = st.schedule.doubling_mut() {
                doubling_trick_update(d, gap);
            }
        }
    }
    Ok(())
}
