//! Finite discounted stochastic games: representation, validation,
//! classification, ergodicity certificates, sampling and persistence.

mod class;
mod ergodic;
mod generate;
mod io;
pub(crate) mod sample;

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use class::{classify, classify_with_tolerance, GameClass, CLASS_TOLERANCE};
pub use ergodic::{check_ergodicity, support_matrix, ErgodicityReport};
pub use generate::{random_ergodic_game, GameDims};
pub use io::{load, parse_game, save, write_game};
pub use sample::{sample_reward, sample_rewards, sample_transition, NoiseSpec};

/// Row-sum tolerance for transition distributions.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// One player's action set `A^i = {0, .., action_count - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlayerSpec {
    pub action_count: usize,
}

/// Flattening of joint actions, row-major over players in declared order:
/// the first player is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointActionSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl JointActionSpace {
    pub fn new(counts: &[usize]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidDimensions(
                "at least one player is required".into(),
            ));
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidDimensions(format!(
                "player {i} has no actions"
            )));
        }
        let mut strides = vec![1; counts.len()];
        for i in (0..counts.len() - 1).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        let size = counts.iter().product();
        Ok(Self {
            counts: counts.to_vec(),
            strides,
            size,
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn action_count(&self, player: usize) -> usize {
        self.counts[player]
    }

    /// Action of `player` inside the flattened joint action.
    #[inline]
    pub fn component(&self, joint: usize, player: usize) -> usize {
        (joint / self.strides[player]) % self.counts[player]
    }

    pub fn encode(&self, actions: &[usize]) -> Result<usize> {
        if actions.len() != self.counts.len() {
            return Err(Error::InvalidDimensions(format!(
                "joint action has {} components, expected {}",
                actions.len(),
                self.counts.len()
            )));
        }
        let mut joint = 0;
        for (i, (&a, &n)) in actions.iter().zip(&self.counts).enumerate() {
            if a >= n {
                return Err(Error::OutOfRange {
                    what: "action",
                    index: a,
                    limit: n,
                });
            }
            joint += a * self.strides[i];
        }
        Ok(joint)
    }

    pub fn decode(&self, joint: usize) -> Vec<usize> {
        (0..self.counts.len())
            .map(|i| self.component(joint, i))
            .collect()
    }

    /// Probability of each joint action under independent mixed actions.
    pub fn product_weights<T: Scalar>(&self, mixed: &[Vec<T>], out: &mut Vec<T>) {
        out.clear();
        out.resize(self.size, T::one());
        for (i, block) in mixed.iter().enumerate() {
            let stride = self.strides[i];
            let n = self.counts[i];
            for (j, w) in out.iter_mut().enumerate() {
                *w *= block[(j / stride) % n];
            }
        }
    }
}

/// Read access to reward and transition tensors. Implemented by the true
/// game and by learned model estimates so that every payoff computation
/// goes through one code path.
pub trait PayoffModel<T: Scalar> {
    fn num_states(&self) -> usize;
    fn joint_actions(&self) -> &JointActionSpace;
    fn discount(&self) -> T;
    /// `r^i_s(a)` for a flattened joint action.
    fn reward(&self, player: usize, state: usize, joint: usize) -> T;
    /// `q_s(a)` as a distribution over next states.
    fn transition(&self, state: usize, joint: usize) -> &[T];

    fn num_players(&self) -> usize {
        self.joint_actions().num_players()
    }
}

/// A finite discounted stochastic game. Immutable once constructed.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticGame<T> {
    num_states: usize,
    players: Vec<PlayerSpec>,
    joint: JointActionSpace,
    discount: T,
    /// `[player][state][joint]`, flattened.
    rewards: Vec<T>,
    /// `[state][joint][next_state]`, flattened.
    transitions: Vec<T>,
}

impl<T: Scalar> StochasticGame<T> {
    /// Builds a game from flat tensors. Only shapes are checked here; use
    /// [`validate`] for the value invariants.
    pub fn new(
        num_states: usize,
        action_counts: &[usize],
        discount: T,
        rewards: Vec<T>,
        transitions: Vec<T>,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidDimensions(
                "num_states must be positive".into(),
            ));
        }
        let joint = JointActionSpace::new(action_counts)?;
        let n = action_counts.len();
        let want_r = n * num_states * joint.size();
        let want_q = num_states * joint.size() * num_states;
        if rewards.len() != want_r {
            return Err(Error::InvalidDimensions(format!(
                "rewards has {} entries, expected {want_r}",
                rewards.len()
            )));
        }
        if transitions.len() != want_q {
            return Err(Error::InvalidDimensions(format!(
                "transitions has {} entries, expected {want_q}",
                transitions.len()
            )));
        }
        Ok(Self {
            num_states,
            players: action_counts
                .iter()
                .map(|&action_count| PlayerSpec { action_count })
                .collect(),
            joint,
            discount,
            rewards,
            transitions,
        })
    }

    /// Builds a game from nested `[player][state][joint]` rewards and
    /// `[state][joint][next]` transitions.
    pub fn from_nested(
        num_states: usize,
        action_counts: &[usize],
        discount: T,
        rewards: &[Vec<Vec<T>>],
        transitions: &[Vec<Vec<T>>],
    ) -> Result<Self> {
        let joint = JointActionSpace::new(action_counts)?;
        let shape_err =
            |what: &str| Error::InvalidDimensions(format!("{what} has the wrong shape"));
        if rewards.len() != action_counts.len()
            || rewards
                .iter()
                .any(|p| p.len() != num_states || p.iter().any(|s| s.len() != joint.size()))
        {
            return Err(shape_err("rewards"));
        }
        if transitions.len() != num_states
            || transitions
                .iter()
                .any(|s| s.len() != joint.size() || s.iter().any(|row| row.len() != num_states))
        {
            return Err(shape_err("transitions"));
        }
        let flat_r = rewards.iter().flatten().flatten().copied().collect();
        let flat_q = transitions.iter().flatten().flatten().copied().collect();
        Self::new(num_states, action_counts, discount, flat_r, flat_q)
    }

    pub fn players(&self) -> &[PlayerSpec] {
        &self.players
    }

    pub fn action_counts(&self) -> &[usize] {
        self.joint.counts()
    }

    pub fn max_action_count(&self) -> usize {
        self.joint.counts().iter().copied().max().unwrap_or(1)
    }

    pub fn rewards_flat(&self) -> &[T] {
        &self.rewards
    }

    pub fn transitions_flat(&self) -> &[T] {
        &self.transitions
    }

    /// `‖r‖∞` over all players, states and joint actions.
    pub fn reward_sup_norm(&self) -> T {
        crate::scalar::sup_norm(&self.rewards)
    }

    #[inline]
    pub(crate) fn reward_index(&self, player: usize, state: usize, joint: usize) -> usize {
        (player * self.num_states + state) * self.joint.size() + joint
    }

    #[inline]
    pub(crate) fn transition_offset(&self, state: usize, joint: usize) -> usize {
        (state * self.joint.size() + joint) * self.num_states
    }

    pub(crate) fn check_indices(&self, state: usize, joint: usize) -> Result<()> {
        if state >= self.num_states {
            return Err(Error::OutOfRange {
                what: "state",
                index: state,
                limit: self.num_states,
            });
        }
        if joint >= self.joint.size() {
            return Err(Error::OutOfRange {
                what: "joint action",
                index: joint,
                limit: self.joint.size(),
            });
        }
        Ok(())
    }

    /// Rewards of one player at one state, indexed by joint action.
    pub fn reward_slice(&self, player: usize, state: usize) -> &[T] {
        let start = self.reward_index(player, state, 0);
        &self.rewards[start..start + self.joint.size()]
    }
}

impl<T: Scalar> PayoffModel<T> for StochasticGame<T> {
    #[inline]
    fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    fn joint_actions(&self) -> &JointActionSpace {
        &self.joint
    }

    #[inline]
    fn discount(&self) -> T {
        self.discount
    }

    #[inline]
    fn reward(&self, player: usize, state: usize, joint: usize) -> T {
        self.rewards[self.reward_index(player, state, joint)]
    }

    #[inline]
    fn transition(&self, state: usize, joint: usize) -> &[T] {
        let start = self.transition_offset(state, joint);
        &self.transitions[start..start + self.num_states]
    }
}

/// One violated invariant, located by tensor indices.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue {
    Discount {
        value: f64,
    },
    NonFiniteReward {
        player: usize,
        state: usize,
        joint: usize,
    },
    NonFiniteTransition {
        state: usize,
        joint: usize,
        next: usize,
    },
    NegativeTransition {
        state: usize,
        joint: usize,
        next: usize,
        value: f64,
    },
    RowSum {
        state: usize,
        joint: usize,
        sum: f64,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Discount { value } => write!(f, "discount {value} outside [0, 1)"),
            Self::NonFiniteReward {
                player,
                state,
                joint,
            } => {
                write!(f, "reward (i={player}, s={state}, a={joint}) is not finite")
            }
            Self::NonFiniteTransition { state, joint, next } => {
                write!(
                    f,
                    "transition (s={state}, a={joint}, s'={next}) is not finite"
                )
            }
            Self::NegativeTransition {
                state,
                joint,
                next,
                value,
            } => write!(
                f,
                "transition (s={state}, a={joint}, s'={next}) is negative: {value}"
            ),
            Self::RowSum { state, joint, sum } => {
                write!(f, "transition row (s={state}, a={joint}) sums to {sum}")
            }
        }
    }
}

/// Outcome of [`validate`]; empty means every invariant holds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks every value invariant of a game.
///
/// A discount of exactly 0 is accepted: it degenerates to a repeated
/// one-shot game and every routine handles it.
pub fn validate<T: Scalar>(game: &StochasticGame<T>) -> ValidationReport {
    let mut issues = Vec::new();
    let delta = game.discount.to_f64_lossy();
    if !(0.0..1.0).contains(&delta) {
        issues.push(ValidationIssue::Discount { value: delta });
    }
    let a_size = game.joint.size();
    for player in 0..game.num_players() {
        for state in 0..game.num_states {
            for joint in 0..a_size {
                if !game.reward(player, state, joint).is_finite() {
                    issues.push(ValidationIssue::NonFiniteReward {
                        player,
                        state,
                        joint,
                    });
                }
            }
        }
    }
    for state in 0..game.num_states {
        for joint in 0..a_size {
            let row = game.transition(state, joint);
            let mut finite = true;
            for (next, &p) in row.iter().enumerate() {
                if !p.is_finite() {
                    finite = false;
                    issues.push(ValidationIssue::NonFiniteTransition { state, joint, next });
                } else if p < T::zero() {
                    issues.push(ValidationIssue::NegativeTransition {
                        state,
                        joint,
                        next,
                        value: p.to_f64_lossy(),
                    });
                }
            }
            if finite {
                let sum: f64 = row.iter().map(|p| p.to_f64_lossy()).sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    issues.push(ValidationIssue::RowSum { state, joint, sum });
                }
            }
        }
    }
    ValidationReport { issues }
}
