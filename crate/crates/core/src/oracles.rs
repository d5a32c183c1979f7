//! Ground-truth solvers: regularized Shapley value iteration for zero-sum
//! games, soft value iteration for single-agent problems, and the
//! fixed-point residuals that characterize regularized equilibria.

use crate::auxiliary::{solve_from, AuxiliaryContext};
use crate::error::{Error, Result};
use crate::game::{classify, GameClass, PayoffModel, StochasticGame};
use crate::profile::{ContinuationValues, StationaryProfile, ValueMode};
use crate::regularizers::{logit_response, ArgmaxOptions, Regularizer, Temperature};
use crate::scalar::{log_sum_exp, Scalar};

/// Outer iteration cap for both value iterations.
pub const MAX_OUTER_ITERATIONS: usize = 1_000_000;

/// Solution of a value iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub values: ContinuationValues<T>,
    pub profile: StationaryProfile<T>,
    /// Final `‖Φ(u) − u‖∞`.
    pub residual: T,
    pub iterations: usize,
    /// `‖Φ(u_k) − u_k‖∞` for every outer iteration `k`.
    pub residual_history: Vec<T>,
}

/// Tolerances for [`zs_regularized_value_iteration`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleTolerances<T> {
    pub outer: T,
    pub inner: T,
}

impl<T: Scalar> Default for OracleTolerances<T> {
    fn default() -> Self {
        Self {
            outer: T::lit(1e-9),
            inner: T::lit(1e-10),
        }
    }
}

/// One application of the regularized Shapley operator to player 1's value
/// table: the saddle value of the regularized auxiliary matrix game at every
/// state. `warm` holds the previous saddle points and is updated in place.
pub fn regularized_shapley<T: Scalar, R: Regularizer<T> + ?Sized>(
    game: &StochasticGame<T>,
    values: &[T],
    beta: Temperature<T>,
    reg: &R,
    inner_tol: T,
    warm: &mut StationaryProfile<T>,
) -> Result<Vec<T>> {
    let table = ContinuationValues::from_tables(ValueMode::ZeroSum, 2, vec![values.to_vec()])?;
    let ctx = AuxiliaryContext::new(game, &table, beta, reg);
    let mut out = Vec::with_capacity(game.num_states());
    for s in 0..game.num_states() {
        let matrix = ctx.payoff_matrix(s)?;
        let start = warm.at(s);
        let saddle = solve_from(
            &matrix,
            beta,
            reg,
            inner_tol,
            start[0].clone(),
            start[1].clone(),
            100_000,
        )?;
        out.push(saddle.value);
        let slot = warm.at_mut(s);
        slot[0] = saddle.row;
        slot[1] = saddle.col;
    }
    Ok(out)
}

/// Fixed point of the regularized Shapley operator of a zero-sum game.
///
/// The operator is a `δ`-contraction in the sup norm; iteration starts at
/// `u = 0` and stops once `‖Φ(u) − u‖∞ ≤ tol.outer`.
pub fn zs_regularized_value_iteration<T: Scalar, R: Regularizer<T> + ?Sized>(
    game: &StochasticGame<T>,
    beta: Temperature<T>,
    reg: &R,
    tol: OracleTolerances<T>,
) -> Result<OracleResult<T>> {
    let class = classify(game);
    if !class.is_zero_sum() {
        return Err(Error::ClassMismatch {
            expected: "ZeroSum".into(),
            found: class.name().into(),
        });
    }
    let mut profile = StationaryProfile::uniform(game.num_states(), game.action_counts());
    let mut u = vec![T::zero(); game.num_states()];
    let mut history = Vec::new();
    for k in 0..MAX_OUTER_ITERATIONS {
        let next = regularized_shapley(game, &u, beta, reg, tol.inner, &mut profile)?;
        let residual = max_abs_diff(&next, &u);
        history.push(residual);
        u = next;
        if residual <= tol.outer {
            return Ok(OracleResult {
                values: ContinuationValues::from_tables(ValueMode::ZeroSum, 2, vec![u])?,
                profile,
                residual,
                iterations: k + 1,
                residual_history: history,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "regularized Shapley iteration",
        iterations: MAX_OUTER_ITERATIONS,
        residual: history.last().map_or(f64::NAN, |r| r.to_f64_lossy()),
    })
}

/// Soft Bellman backup
/// `V_s ← β log Σ_a exp(((1−δ) r_s(a) + δ Σ_{s'} q_s(a)(s') V_{s'}) / β)`.
pub fn soft_bellman<T: Scalar>(
    game: &StochasticGame<T>,
    values: &[T],
    beta: Temperature<T>,
) -> Vec<T> {
    (0..game.num_states())
        .map(|s| beta.get() * log_sum_exp(&soft_q(game, values, beta, s)))
        .collect()
}

/// `Q_s(a) / β` for every action of a single-player game.
fn soft_q<T: Scalar>(
    game: &StochasticGame<T>,
    values: &[T],
    beta: Temperature<T>,
    state: usize,
) -> Vec<T> {
    let delta = game.discount();
    (0..game.joint_actions().size())
        .map(|a| {
            let cont: T = game
                .transition(state, a)
                .iter()
                .zip(values)
                .map(|(&q, &v)| q * v)
                .sum();
            ((T::one() - delta) * game.reward(0, state, a) + delta * cont) / beta.get()
        })
        .collect()
}

/// Optimal values and logit policy of an entropy-regularized single-agent
/// problem.
pub fn soft_value_iteration<T: Scalar>(
    game: &StochasticGame<T>,
    beta: Temperature<T>,
    tol: T,
) -> Result<OracleResult<T>> {
    if game.num_players() != 1 {
        return Err(Error::ClassMismatch {
            expected: "single player".into(),
            found: format!("{} players", game.num_players()),
        });
    }
    if !game.rewards_flat().iter().all(|r| r.is_finite()) {
        return Err(Error::NonFinite {
            time: 0.0,
            detail: "reward table".into(),
        });
    }
    let mut v = vec![T::zero(); game.num_states()];
    let mut history = Vec::new();
    for k in 0..MAX_OUTER_ITERATIONS {
        let next = soft_bellman(game, &v, beta);
        let residual = max_abs_diff(&next, &v);
        history.push(residual);
        v = next;
        if residual <= tol {
            let policy = (0..game.num_states())
                .map(|s| {
                    let q: Vec<T> = soft_q(game, &v, beta, s)
                        .into_iter()
                        .map(|z| z * beta.get())
                        .collect();
                    vec![logit_response(&q, beta)]
                })
                .collect();
            return Ok(OracleResult {
                values: ContinuationValues::shared(v, 1),
                profile: StationaryProfile::from_nested(policy),
                residual,
                iterations: k + 1,
                residual_history: history,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "soft value iteration",
        iterations: MAX_OUTER_ITERATIONS,
        residual: history.last().map_or(f64::NAN, |r| r.to_f64_lossy()),
    })
}

/// Dispatches to the oracle supported by the game's class.
pub fn solve_oracle<T: Scalar, R: Regularizer<T> + ?Sized>(
    game: &StochasticGame<T>,
    beta: Temperature<T>,
    reg: &R,
    tol: T,
) -> Result<OracleResult<T>> {
    if game.num_players() == 1 {
        if reg.name() != "entropy" {
            return Err(Error::InvalidParameter(
                "soft value iteration needs the entropy regularizer".into(),
            ));
        }
        return soft_value_iteration(game, beta, tol);
    }
    match classify(game) {
        GameClass::ZeroSum => zs_regularized_value_iteration(
            game,
            beta,
            reg,
            OracleTolerances {
                outer: tol,
                inner: (tol * T::lit(0.1)).max(T::lit(1e-13)),
            },
        ),
        other => Err(Error::ClassMismatch {
            expected: "ZeroSum or single player (use equilibrium_residuals for other classes)"
                .into(),
            found: other.name().into(),
        }),
    }
}

/// Per-state fixed-point residuals of a profile and value table.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    /// `max_k |f^k_{s,u}(x_s) + β h^k(x_s) − u^k_s|`.
    pub value: Vec<T>,
    /// `max_i ‖x^i_s − br^i_s(u, x_s)‖∞`.
    pub best_response: Vec<T>,
}

impl<T: Scalar> ResidualReport<T> {
    pub fn max_value(&self) -> T {
        self.value.iter().copied().fold(T::zero(), T::max)
    }

    pub fn max_best_response(&self) -> T {
        self.best_response.iter().copied().fold(T::zero(), T::max)
    }
}

/// Residuals of the two conditions `Γ = u` and `x = br(u, x)` that
/// characterize regularized equilibria, evaluated against `model`.
pub fn equilibrium_residuals<T, M, R>(
    model: &M,
    beta: Temperature<T>,
    reg: &R,
    options: &ArgmaxOptions<T>,
    x: &StationaryProfile<T>,
    u: &ContinuationValues<T>,
) -> Result<ResidualReport<T>>
where
    T: Scalar,
    M: PayoffModel<T> + ?Sized,
    R: Regularizer<T> + ?Sized,
{
    let mut ctx = AuxiliaryContext::new(model, u, beta, reg);
    ctx.options = *options;
    let mut value = Vec::with_capacity(model.num_states());
    let mut best_response = Vec::with_capacity(model.num_states());
    for s in 0..model.num_states() {
        let xs = x.at(s);
        let mut rv = T::zero();
        for k in 0..u.num_tables() {
            rv = rv.max((ctx.regularized_payoff(k, s, xs) - u.table(k)[s]).abs());
        }
        let mut rb = T::zero();
        for (i, block) in xs.iter().enumerate() {
            let br = ctx.smooth_best_response(i, s, xs)?;
            rb = rb.max(max_abs_diff(block, &br));
        }
        value.push(rv);
        best_response.push(rb);
    }
    Ok(ResidualReport {
        value,
        best_response,
    })
}

fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}
