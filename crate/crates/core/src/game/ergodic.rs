use std::fmt;

use super::{PayoffModel, StochasticGame};
use crate::scalar::Scalar;

/// Sufficient ergodicity certificate.
///
/// `Certified { horizon }` means every state is reached from every state
/// with positive probability after exactly `horizon` steps, whatever the
/// players do. `NotCertified` makes no claim either way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErgodicityReport {
    Certified { horizon: usize },
    NotCertified,
}

impl ErgodicityReport {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified { .. })
    }
}

impl fmt::Display for ErgodicityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Certified { horizon } => write!(f, "ergodic: certified T={horizon}"),
            Self::NotCertified => write!(f, "ergodic: not certified"),
        }
    }
}

/// `B[s][s'] = true` iff every joint action at `s` reaches `s'` with positive
/// probability.
pub fn support_matrix<T: Scalar>(game: &StochasticGame<T>) -> Vec<Vec<bool>> {
    let n = game.num_states();
    let joint = game.joint_actions().size();
    (0..n)
        .map(|s| {
            (0..n)
                .map(|next| (0..joint).all(|a| game.transition(s, a)[next] > T::zero()))
                .collect()
        })
        .collect()
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// Searches the least `T ≤ S²` with `B^T` entrywise positive.
pub fn check_ergodicity<T: Scalar>(game: &StochasticGame<T>) -> ErgodicityReport {
    let base = support_matrix(game);
    let n = base.len();
    let mut power = base.clone();
    for horizon in 1..=n * n {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            return ErgodicityReport::Certified { horizon };
        }
        power = bool_product(&power, &base);
    }
    ErgodicityReport::NotCertified
}
