use crate::error::{Error, Result};
use crate::game::{JointActionSpace, PayoffModel, StochasticGame};
use crate::scalar::Scalar;

/// Empirical model built from observed play: visit counts, running-mean
/// rewards and transition frequencies per `(state, joint action)`.
///
/// Rewards are stored as sums and transitions as integer counts, so the
/// reported means are exactly the arithmetic means of the observations.
/// Unvisited pairs report zero reward and a uniform transition row.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelEstimate<T> {
    num_states: usize,
    space: JointActionSpace,
    discount: T,
    visits: Vec<u64>,
    reward_sums: Vec<T>,
    reward_means: Vec<T>,
    next_counts: Vec<u64>,
    transitions: Vec<T>,
    frozen: bool,
}

impl<T: Scalar> ModelEstimate<T> {
    /// Empty estimate shaped like `game`.
    pub fn new(game: &StochasticGame<T>) -> Self {
        let s = game.num_states();
        let m = game.joint_actions().size();
        let n = game.num_players();
        let uniform = T::one() / T::lit(s as f64);
        Self {
            num_states: s,
            space: game.joint_actions().clone(),
            discount: game.discount(),
            visits: vec![0; s * m],
            reward_sums: vec![T::zero(); n * s * m],
            reward_means: vec![T::zero(); n * s * m],
            next_counts: vec![0; s * m * s],
            transitions: vec![uniform; s * m * s],
            frozen: false,
        }
    }

    /// Estimate equal to the true model that ignores further observations.
    pub fn seeded_from_truth(game: &StochasticGame<T>) -> Self {
        let mut est = Self::new(game);
        est.reward_means.copy_from_slice(game.rewards_flat());
        est.transitions.copy_from_slice(game.transitions_flat());
        est.frozen = true;
        est
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn visits(&self, state: usize, joint: usize) -> u64 {
        self.visits[state * self.space.size() + joint]
    }

    /// Visit counts, indexed `[state][joint]`.
    pub fn visit_counts(&self) -> &[u64] {
        &self.visits
    }

    /// Records the realized rewards and next state at `(state, joint)`.
    pub fn observe(
        &mut self,
        state: usize,
        joint: usize,
        rewards: &[T],
        next: usize,
    ) -> Result<()> {
        let m = self.space.size();
        let s_count = self.num_states;
        for (what, index, limit) in [
            ("state", state, s_count),
            ("joint action", joint, m),
            ("next state", next, s_count),
        ] {
            if index >= limit {
                return Err(Error::OutOfRange { what, index, limit });
            }
        }
        if rewards.len() != self.space.num_players() {
            return Err(Error::InvalidDimensions(format!(
                "expected {} rewards, got {}",
                self.space.num_players(),
                rewards.len()
            )));
        }
        if self.frozen {
            return Ok(());
        }
        let pair = state * m + joint;
        self.visits[pair] += 1;
        let count = T::lit(self.visits[pair] as f64);
        for (i, &r) in rewards.iter().enumerate() {
            let k = (i * s_count + state) * m + joint;
            self.reward_sums[k] += r;
            self.reward_means[k] = self.reward_sums[k] / count;
        }
        let row = pair * s_count;
        self.next_counts[row + next] += 1;
        for t in 0..s_count {
            self.transitions[row + t] = T::lit(self.next_counts[row + t] as f64) / count;
        }
        Ok(())
    }

    /// `max |r̂ − r|` over all players and pairs.
    pub fn reward_error(&self, game: &StochasticGame<T>) -> T {
        max_abs_diff(&self.reward_means, game.rewards_flat())
    }

    /// `max |q̂ − q|` over all pairs and next states.
    pub fn transition_error(&self, game: &StochasticGame<T>) -> T {
        max_abs_diff(&self.transitions, game.transitions_flat())
    }

    /// `max_{s'} |q̂_s(a)(s') − q_s(a)(s')|` for one pair.
    pub fn row_error(&self, game: &StochasticGame<T>, state: usize, joint: usize) -> T {
        max_abs_diff(self.transition(state, joint), game.transition(state, joint))
    }
}

fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

impl<T: Scalar> PayoffModel<T> for ModelEstimate<T> {
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
        self.reward_means[(player * self.num_states + state) * self.space.size() + joint]
    }

    #[inline]
    fn transition(&self, state: usize, joint: usize) -> &[T] {
        let off = (state * self.space.size() + joint) * self.num_states;
        &self.transitions[off..off + self.num_states]
    }
}
