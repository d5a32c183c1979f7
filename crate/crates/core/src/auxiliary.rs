//! One-shot auxiliary games at a state: payoffs, smooth best responses,
//! the zero-sum duality gap and regularized matrix-game saddle points.

use crate::error::{Error, Result};
use crate::game::PayoffModel;
use crate::profile::{ContinuationValues, ValueMode};
use crate::regularizers::{ArgmaxOptions, Regularizer, Temperature};
use crate::scalar::Scalar;

/// Everything needed to evaluate the auxiliary game at any state.
///
/// `model` is either the true game or a learned estimate.
pub struct AuxiliaryContext<'a, T: Scalar, M: ?Sized, R: ?Sized> {
    pub model: &'a M,
    pub values: &'a ContinuationValues<T>,
    pub temperature: Temperature<T>,
    pub regularizer: &'a R,
    pub options: ArgmaxOptions<T>,
}

impl<'a, T, M, R> AuxiliaryContext<'a, T, M, R>
where
    T: Scalar,
    M: PayoffModel<T> + ?Sized,
    R: Regularizer<T> + ?Sized,
{
    pub fn new(
        model: &'a M,
        values: &'a ContinuationValues<T>,
        temperature: Temperature<T>,
        regularizer: &'a R,
    ) -> Self {
        Self {
            model,
            values,
            temperature,
            regularizer,
            options: ArgmaxOptions::default(),
        }
    }

    /// Same context evaluated against another model.
    pub fn with_model<'b, N: PayoffModel<T> + ?Sized>(
        &self,
        model: &'b N,
    ) -> AuxiliaryContext<'b, T, N, R>
    where
        'a: 'b,
    {
        AuxiliaryContext {
            model,
            values: self.values,
            temperature: self.temperature,
            regularizer: self.regularizer,
            options: self.options,
        }
    }

    /// `(1−δ) r^i_s(a) + δ Σ_{s'} q_s(a)(s') u^i(s')` for every joint action.
    pub fn joint_payoffs(&self, player: usize, state: usize, out: &mut Vec<T>) {
        let delta = self.model.discount();
        let size = self.model.joint_actions().size();
        out.clear();
        for a in 0..size {
            let row = self.model.transition(state, a);
            let cont: T = row
                .iter()
                .enumerate()
                .map(|(next, &q)| q * self.values.get(player, next))
                .sum();
            out.push((T::one() - delta) * self.model.reward(player, state, a) + delta * cont);
        }
    }

    /// Auxiliary payoff of player `i` at state `s` under joint mixed action `x`.
    pub fn auxiliary_payoff(&self, player: usize, state: usize, x: &[Vec<T>]) -> T {
        let mut g = Vec::new();
        let mut w = Vec::new();
        self.joint_payoffs(player, state, &mut g);
        self.model.joint_actions().product_weights(x, &mut w);
        g.iter().zip(&w).map(|(&a, &b)| a * b).sum()
    }

    /// Expected auxiliary payoff of each own action of `player` against `x^{−i}`.
    pub fn own_action_payoffs(&self, player: usize, state: usize, x: &[Vec<T>], out: &mut Vec<T>) {
        let mut g = Vec::new();
        self.joint_payoffs(player, state, &mut g);
        marginal_payoffs(self.model.joint_actions(), &g, player, x, out);
    }

    /// Smooth best response of `player` at `state` against `x^{−i}`.
    pub fn smooth_best_response(
        &self,
        player: usize,
        state: usize,
        x: &[Vec<T>],
    ) -> Result<Vec<T>> {
        let mut p = Vec::new();
        self.own_action_payoffs(player, state, x, &mut p);
        self.regularizer
            .smooth_argmax(&p, self.temperature, &self.options)
    }

    /// `f^k_{s,u}(x) + β h^k(x)` for the owner of value table `k`.
    pub fn regularized_payoff(&self, table: usize, state: usize, x: &[Vec<T>]) -> T {
        let owner = self.values.table_owner(table);
        let coupling = self.values.mode().coupling();
        self.auxiliary_payoff(owner, state, x)
            + self.temperature.get() * coupling.player_value(self.regularizer, owner, x)
    }

    /// Player 1's auxiliary payoff matrix at `state` (zero-sum mode).
    pub fn payoff_matrix(&self, state: usize) -> Result<MatrixGame<T>> {
        if self.values.mode() != ValueMode::ZeroSum {
            return Err(Error::ClassMismatch {
                expected: "ZeroSum".into(),
                found: format!("{:?} values", self.values.mode()),
            });
        }
        let counts = self.model.joint_actions().counts();
        let mut g = Vec::new();
        self.joint_payoffs(0, state, &mut g);
        MatrixGame::new(counts[0], counts[1], g)
    }

    /// Duality gap `w_s` of the regularized zero-sum auxiliary game at `x`.
    pub fn duality_gap(&self, state: usize, x: &[Vec<T>]) -> Result<DualityGapRecord<T>> {
        let game = self.payoff_matrix(state)?;
        let eval = game.gap(
            &x[0],
            &x[1],
            self.temperature,
            self.regularizer,
            &self.options,
        )?;
        Ok(DualityGapRecord {
            state,
            value: eval.gap,
            maximizer: eval.row_response,
            minimizer: eval.col_response,
        })
    }
}

/// Marginalizes joint payoffs `g` onto `player`'s own actions against `x^{−i}`.
pub(crate) fn marginal_payoffs<T: Scalar>(
    space: &crate::game::JointActionSpace,
    g: &[T],
    player: usize,
    x: &[Vec<T>],
    out: &mut Vec<T>,
) {
    out.clear();
    out.resize(space.action_count(player), T::zero());
    for (a, &ga) in g.iter().enumerate() {
        let mut w = T::one();
        for (j, block) in x.iter().enumerate() {
            if j != player {
                w *= block[space.component(a, j)];
            }
        }
        out[space.component(a, player)] += w * ga;
    }
}

/// Duality gap at one state with the two one-sided deviations attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityGapRecord<T> {
    pub state: usize,
    pub value: T,
    /// Player 1's smooth best response against `x²`.
    pub maximizer: Vec<T>,
    /// Player 2's smooth best response against `x¹`.
    pub minimizer: Vec<T>,
}

/// Bilinear zero-sum game `y¹ᵀ A y²` (player 1 maximizes), entries row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

/// Gap evaluation with the best responses that realize it.
#[derive(Clone, Debug)]
pub struct GapEvaluation<T> {
    pub gap: T,
    pub row_response: Vec<T>,
    pub col_response: Vec<T>,
}

/// Saddle point of a regularized matrix game.
#[derive(Clone, Debug)]
pub struct SaddlePoint<T> {
    pub row: Vec<T>,
    pub col: Vec<T>,
    /// `x¹ᵀ A x² + β(ψ(x¹) − ψ(x²))` at the saddle.
    pub value: T,
    pub gap: T,
    pub iterations: usize,
}

impl<T: Scalar> MatrixGame<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidDimensions(format!(
                "matrix game {rows}x{cols} with {} entries",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDimensions("ragged payoff matrix".into()));
        }
        Self::new(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    /// `A x²`.
    pub fn row_payoffs(&self, col: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j) * col[j]).sum())
            .collect()
    }

    /// `x¹ᵀ A`.
    pub fn col_payoffs(&self, row: &[T]) -> Vec<T> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.entry(i, j) * row[i]).sum())
            .collect()
    }

    /// `x¹ᵀ A x² + β(ψ(x¹) − ψ(x²))`.
    pub fn regularized_value<R: Regularizer<T> + ?Sized>(
        &self,
        row: &[T],
        col: &[T],
        beta: Temperature<T>,
        reg: &R,
    ) -> T {
        let bilinear: T = self
            .row_payoffs(col)
            .iter()
            .zip(row)
            .map(|(&p, &y)| p * y)
            .sum();
        bilinear + beta.get() * (reg.value(row) - reg.value(col))
    }

    /// `max_{y¹} φ(y¹, x²) − min_{y²} φ(x¹, y²)` for
    /// `φ(y¹, y²) = y¹ᵀ A y² + β(ψ(y¹) − ψ(y²))`.
    pub fn gap<R: Regularizer<T> + ?Sized>(
        &self,
        row: &[T],
        col: &[T],
        beta: Temperature<T>,
        reg: &R,
        opts: &ArgmaxOptions<T>,
    ) -> Result<GapEvaluation<T>> {
        let b = beta.get();
        let p1 = self.row_payoffs(col);
        let y1 = reg.smooth_argmax(&p1, beta, opts)?;
        let best1: T = p1.iter().zip(&y1).map(|(&p, &y)| p * y).sum::<T>() + b * reg.value(&y1);
        // Player 2 minimizes ⟨x¹ᵀA, y²⟩ − βψ(y²), i.e. maximizes ⟨−x¹ᵀA, y²⟩ + βψ(y²).
        let p2: Vec<T> = self.col_payoffs(row).into_iter().map(|v| -v).collect();
        let y2 = reg.smooth_argmax(&p2, beta, opts)?;
        let best2: T = p2.iter().zip(&y2).map(|(&p, &y)| p * y).sum::<T>() + b * reg.value(&y2);
        let gap = best1 + best2 - b * (reg.value(row) + reg.value(col));
        Ok(GapEvaluation {
            gap,
            row_response: y1,
            col_response: y2,
        })
    }
}

/// Saddle point of `x¹ᵀ A x² + β(ψ(x¹) − ψ(x²))` by damped simultaneous
/// smooth best responses, `x ← x + α(br(x) − x)`.
///
/// The step starts at `α = 0.5`; a step that fails to lower the duality gap
/// is retried with `α` halved, and accepted steps let `α` grow back toward
/// 0.5. Stops once the gap is at most `tol`.
pub fn regularized_matrix_game_solve<T: Scalar, R: Regularizer<T> + ?Sized>(
    game: &MatrixGame<T>,
    beta: Temperature<T>,
    reg: &R,
    tol: T,
) -> Result<SaddlePoint<T>> {
    let row = vec![T::one() / T::lit(game.rows as f64); game.rows];
    let col = vec![T::one() / T::lit(game.cols as f64); game.cols];
    solve_from(game, beta, reg, tol, row, col, 100_000)
}

/// As [`regularized_matrix_game_solve`], warm-started at `(row, col)`.
pub fn solve_from<T: Scalar, R: Regularizer<T> + ?Sized>(
    game: &MatrixGame<T>,
    beta: Temperature<T>,
    reg: &R,
    tol: T,
    mut row: Vec<T>,
    mut col: Vec<T>,
    max_iterations: usize,
) -> Result<SaddlePoint<T>> {
    let opts = ArgmaxOptions::default();
    let half = T::lit(0.5);
    let min_step = T::lit(1e-12);
    let mut eval = game.gap(&row, &col, beta, reg, &opts)?;
    let mut step = half;
    let mut iterations = 0;
    while eval.gap > tol {
        if iterations >= max_iterations {
            return Err(Error::NoConvergence {
                solver: "regularized matrix game",
                iterations,
                residual: eval.gap.to_f64_lossy(),
            });
        }
        iterations += 1;
        let blend = |x: &[T], y: &[T], a: T| -> Vec<T> {
            x.iter().zip(y).map(|(&p, &q)| p + a * (q - p)).collect()
        };
        let cand_row = blend(&row, &eval.row_response, step);
        let cand_col = blend(&col, &eval.col_response, step);
        let cand = game.gap(&cand_row, &cand_col, beta, reg, &opts)?;
        if cand.gap < eval.gap || step <= min_step {
            row = cand_row;
            col = cand_col;
            eval = cand;
            step = (step * T::lit(1.5)).min(half);
        } else {
            step = step * half;
        }
    }
    let value = game.regularized_value(&row, &col, beta, reg);
    Ok(SaddlePoint {
        row,
        col,
        value,
        gap: eval.gap,
        iterations,
    })
}
