use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{PayoffModel, StochasticGame};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Zero-mean payoff perturbation, parameters in payoff units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseSpec<T> {
    None,
    Gaussian {
        sigma: T,
    },
    Uniform {
        halfwidth: T,
    },
    /// `±shift` with probability one half each.
    BernoulliShift {
        shift: T,
    },
}

impl<T: Scalar> Default for NoiseSpec<T> {
    fn default() -> Self {
        Self::Gaussian { sigma: T::lit(0.1) }
    }
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn variance(&self) -> T {
        match *self {
            Self::None => T::zero(),
            Self::Gaussian { sigma } => sigma * sigma,
            Self::Uniform { halfwidth } => halfwidth * halfwidth / T::lit(3.0),
            Self::BernoulliShift { shift } => shift * shift,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = match *self {
            Self::None => return Ok(()),
            Self::Gaussian { sigma } => sigma,
            Self::Uniform { halfwidth } => halfwidth,
            Self::BernoulliShift { shift } => shift,
        };
        if p.is_finite() && p >= T::zero() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "noise parameter {p} must be finite and nonnegative"
            )))
        }
    }

    /// Draws one zero-mean perturbation. `None` consumes no randomness.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            Self::None => T::zero(),
            Self::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * T::lit(z)
            }
            Self::Uniform { halfwidth } => {
                let u: f64 = rng.random();
                halfwidth * T::lit(2.0 * u - 1.0)
            }
            Self::BernoulliShift { shift } => {
                if rng.random::<bool>() {
                    shift
                } else {
                    -shift
                }
            }
        }
    }
}

/// Inverse-CDF draw from a probability row using one uniform variate.
pub(crate) fn sample_index<T: Scalar, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > T::zero() {
            last = k;
            acc += p;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Draws `s' ~ q_s(a)`.
pub fn sample_transition<T: Scalar, R: Rng + ?Sized>(
    game: &StochasticGame<T>,
    state: usize,
    joint: usize,
    rng: &mut R,
) -> Result<usize> {
    game.check_indices(state, joint)?;
    Ok(sample_index(game.transition(state, joint), rng))
}

/// Draws a perturbed reward with conditional mean `r^i_s(a)`.
pub fn sample_reward<T: Scalar, R: Rng + ?Sized>(
    game: &StochasticGame<T>,
    noise: &NoiseSpec<T>,
    player: usize,
    state: usize,
    joint: usize,
    rng: &mut R,
) -> Result<T> {
    game.check_indices(state, joint)?;
    if player >= game.num_players() {
        return Err(Error::OutOfRange {
            what: "player",
            index: player,
            limit: game.num_players(),
        });
    }
    Ok(game.reward(player, state, joint) + noise.draw(rng))
}

/// Draws the realized stage payoffs of every player at `(state, joint)`.
///
/// With `common_shock` the players observe one shared perturbation, signed
/// so that the realized stage game keeps the structure of the expected one
/// (`R² = −R¹` in zero-sum games, equal payoffs otherwise).
pub fn sample_rewards<T: Scalar, R: Rng + ?Sized>(
    game: &StochasticGame<T>,
    noise: &NoiseSpec<T>,
    state: usize,
    joint: usize,
    common_shock: Option<&[T]>,
    rng: &mut R,
    out: &mut Vec<T>,
) -> Result<()> {
    game.check_indices(state, joint)?;
    out.clear();
    match common_shock {
        Some(signs) => {
            let eps = noise.draw(rng);
            for (i, &sign) in signs.iter().enumerate() {
                out.push(game.reward(i, state, joint) + sign * eps);
            }
        }
        None => {
            for i in 0..game.num_players() {
                out.push(game.reward(i, state, joint) + noise.draw(rng));
            }
        }
    }
    Ok(())
}
