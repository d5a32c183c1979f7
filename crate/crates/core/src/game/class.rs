use std::fmt;

use super::{PayoffModel, StochasticGame};
use crate::scalar::Scalar;

/// Entrywise tolerance used by [`classify`], relative to `max(1, ‖r‖∞)`.
pub const CLASS_TOLERANCE: f64 = 1e-12;

/// Payoff structure of a game, most specific first.
#[derive(Clone, Debug, PartialEq)]
pub enum GameClass<T> {
    /// Two players with `r¹ = −r²`.
    ZeroSum,
    /// All players share one payoff function.
    IdenticalInterest,
    /// `r^i = r¹ + c^i`; `offsets[i] = c^i` and `offsets[0] = 0`.
    Team {
        offsets: Vec<T>,
    },
    General,
}

impl<T> GameClass<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ZeroSum => "ZeroSum",
            Self::IdenticalInterest => "IdenticalInterest",
            Self::Team { .. } => "Team",
            Self::General => "General",
        }
    }

    pub fn is_zero_sum(&self) -> bool {
        matches!(self, Self::ZeroSum)
    }
}

impl<T: fmt::Display> fmt::Display for GameClass<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Team { offsets } => {
                write!(f, "Team(")?;
                for (i, c) in offsets.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Returns the most specific class of `game` at the default tolerance.
pub fn classify<T: Scalar>(game: &StochasticGame<T>) -> GameClass<T> {
    classify_with_tolerance(game, T::lit(CLASS_TOLERANCE))
}

pub fn classify_with_tolerance<T: Scalar>(game: &StochasticGame<T>, tol: T) -> GameClass<T> {
    let n = game.num_players();
    let tol = tol * T::one().max(game.reward_sup_norm());
    let s_count = game.num_states();
    let a_count = game.joint_actions().size();
    let entries = || (0..s_count).flat_map(move |s| (0..a_count).map(move |a| (s, a)));

    if n == 2 && entries().all(|(s, a)| (game.reward(0, s, a) + game.reward(1, s, a)).abs() <= tol)
    {
        return GameClass::ZeroSum;
    }

    let mut offsets = vec![T::zero(); n];
    for (i, offset) in offsets.iter_mut().enumerate().skip(1) {
        let c = game.reward(i, 0, 0) - game.reward(0, 0, 0);
        let constant = entries().all(|(s, a)| {
            let d = game.reward(i, s, a) - game.reward(0, s, a);
            (d - c).abs() <= tol
        });
        if !constant {
            return GameClass::General;
        }
        *offset = c;
    }
    if offsets.iter().all(|c| c.abs() <= tol) {
        GameClass::IdenticalInterest
    } else {
        GameClass::Team { offsets }
    }
}
