use rand::Rng;

use super::{GameClass, JointActionSpace, StochasticGame};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of a generated game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameDims<T> {
    pub num_states: usize,
    pub action_counts: Vec<usize>,
    pub discount: T,
}

/// Generates a game whose transition rows are `(1−ε)·random + ε·uniform`,
/// so [`check_ergodicity`](super::check_ergodicity) certifies it with `T = 1`.
///
/// Base rewards are uniform on `[−1, 1]` and arranged to match `class`.
pub fn random_ergodic_game<T: Scalar, R: Rng + ?Sized>(
    dims: &GameDims<T>,
    class: &GameClass<T>,
    mixing: T,
    rng: &mut R,
) -> Result<StochasticGame<T>> {
    if !(mixing > T::zero() && mixing <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "mixing {mixing} must lie in (0, 1]"
        )));
    }
    if dims.num_states == 0 {
        return Err(Error::InvalidDimensions(
            "num_states must be positive".into(),
        ));
    }
    let joint = JointActionSpace::new(&dims.action_counts)?;
    let n = dims.action_counts.len();
    match class {
        GameClass::ZeroSum if n != 2 => {
            return Err(Error::InvalidDimensions(format!(
                "a zero-sum game needs exactly 2 players, got {n}"
            )))
        }
        GameClass::Team { offsets } if offsets.len() != n => {
            return Err(Error::InvalidDimensions(format!(
                "team offsets have {} entries for {n} players",
                offsets.len()
            )))
        }
        _ => {}
    }

    let s_count = dims.num_states;
    let uniform = mixing / T::lit(s_count as f64);
    let mut transitions = Vec::with_capacity(s_count * joint.size() * s_count);
    let mut weights = vec![0.0f64; s_count];
    for _ in 0..s_count * joint.size() {
        for w in weights.iter_mut() {
            // Exp(1) draws give a Dirichlet(1, .., 1) row after normalization.
            *w = -(1.0 - rng.random::<f64>()).ln();
        }
        let total: f64 = weights.iter().sum();
        for &w in &weights {
            transitions.push((T::one() - mixing) * T::lit(w / total) + uniform);
        }
    }

    let block = s_count * joint.size();
    let draw_block = |rng: &mut R| -> Vec<T> {
        (0..block)
            .map(|_| T::lit(2.0 * rng.random::<f64>() - 1.0))
            .collect()
    };
    let mut rewards = Vec::with_capacity(n * block);
    match class {
        GameClass::ZeroSum => {
            let base = draw_block(rng);
            rewards.extend(base.iter().copied());
            rewards.extend(base.iter().map(|&r| -r));
        }
        GameClass::IdenticalInterest => {
            let base = draw_block(rng);
            for _ in 0..n {
                rewards.extend(base.iter().copied());
            }
        }
        GameClass::Team { offsets } => {
            let base = draw_block(rng);
            for &c in offsets {
                rewards.extend(base.iter().map(|&r| r + c));
            }
        }
        GameClass::General => {
            for _ in 0..n {
                rewards.extend(draw_block(rng));
            }
        }
    }
    StochasticGame::new(
        s_count,
        &dims.action_counts,
        dims.discount,
        rewards,
        transitions,
    )
}
