//! Concave regularizers on a player's simplex and the smooth best
//! responses they induce.
//!
//! A [`Regularizer`] is evaluated block by block: `ψ(x^i)` on one player's
//! mixed action. How the blocks combine into each player's perturbation
//! `h^i` is set by a [`Coupling`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Regularization weight `β > 0`, in payoff units.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Temperature<T>(T);

impl<T: Scalar> Temperature<T> {
    pub fn new(beta: T) -> Result<Self> {
        if beta > T::zero() && beta.is_finite() {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {beta}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

/// Stopping rule of the iterative smooth-argmax solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArgmaxOptions<T> {
    /// Bound on `(max_a g(a) − min_a g(a)) / β` with `g = payoff + β∇ψ(y)`.
    pub tol: T,
    pub max_iterations: usize,
    pub damping: T,
}

impl<T: Scalar> Default for ArgmaxOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(64.0)),
            max_iterations: 10_000,
            damping: T::lit(0.5),
        }
    }
}

/// Strictly concave function on one player's simplex.
pub trait Regularizer<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    /// `ψ(y)` for one mixed action.
    fn value(&self, block: &[T]) -> T;

    /// `∇ψ(y)`; only required at interior points.
    fn gradient(&self, block: &[T], out: &mut [T]);

    /// Whether `‖∇ψ‖ → ∞` at the simplex boundary.
    fn is_steep(&self) -> bool;

    /// Largest value of `ψ` on a simplex with `n` vertices.
    fn max_value(&self, n: usize) -> T;

    /// Writes `argmax_y ⟨y, payoffs⟩ + β ψ(y)` into `out`.
    fn smooth_argmax_into(
        &self,
        payoffs: &[T],
        beta: Temperature<T>,
        opts: &ArgmaxOptions<T>,
        out: &mut [T],
    ) -> Result<()> {
        generic_smooth_argmax_into(self, payoffs, beta, opts, out)
    }

    fn smooth_argmax(
        &self,
        payoffs: &[T],
        beta: Temperature<T>,
        opts: &ArgmaxOptions<T>,
    ) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); payoffs.len()];
        self.smooth_argmax_into(payoffs, beta, opts, &mut out)?;
        Ok(out)
    }

    /// Sum of `ψ` over every block of a profile.
    fn profile_value(&self, profile: &[Vec<T>]) -> T {
        profile.iter().map(|b| self.value(b)).sum()
    }
}

/// Shannon entropy, `ψ(y) = −Σ y(a) log y(a)` with `0 log 0 = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Entropy;

/// `ψ(y) = Σ y(a)(1 − y(a))`: strictly concave but with bounded gradient,
/// so it violates the steepness hypothesis. Kept as a negative fixture.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TsallisNonSteep;

impl<T: Scalar> Regularizer<T> for Entropy {
    fn name(&self) -> &'static str {
        "entropy"
    }

    fn value(&self, block: &[T]) -> T {
        block
            .iter()
            .filter(|&&p| p > T::zero())
            .map(|&p| -p * p.ln())
            .sum()
    }

    fn gradient(&self, block: &[T], out: &mut [T]) {
        for (g, &p) in out.iter_mut().zip(block) {
            *g = -T::one() - p.ln();
        }
    }

    fn is_steep(&self) -> bool {
        true
    }

    fn max_value(&self, n: usize) -> T {
        T::lit(n as f64).ln()
    }

    fn smooth_argmax_into(
        &self,
        payoffs: &[T],
        beta: Temperature<T>,
        _opts: &ArgmaxOptions<T>,
        out: &mut [T],
    ) -> Result<()> {
        logit_into(payoffs, beta, out);
        Ok(())
    }
}

impl<T: Scalar> Regularizer<T> for TsallisNonSteep {
    fn name(&self) -> &'static str {
        "tsallis-nonsteep"
    }

    fn value(&self, block: &[T]) -> T {
        block.iter().map(|&p| p * (T::one() - p)).sum()
    }

    fn gradient(&self, block: &[T], out: &mut [T]) {
        for (g, &p) in out.iter_mut().zip(block) {
            *g = T::one() - p - p;
        }
    }

    fn is_steep(&self) -> bool {
        false
    }

    fn max_value(&self, n: usize) -> T {
        T::one() - T::one() / T::lit(n as f64)
    }
}

/// Regularizer selected by name at run time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularizerKind {
    #[default]
    Entropy,
    TsallisNonsteep,
}

impl fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Entropy => "entropy",
            Self::TsallisNonsteep => "tsallis-nonsteep",
        })
    }
}

impl FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(Self::Entropy),
            "tsallis-nonsteep" => Ok(Self::TsallisNonsteep),
            other => Err(Error::InvalidParameter(format!(
                "unknown regularizer `{other}` (expected `entropy` or `tsallis-nonsteep`)"
            ))),
        }
    }
}

impl<T: Scalar> Regularizer<T> for RegularizerKind {
    fn name(&self) -> &'static str {
        match self {
            Self::Entropy => <Entropy as Regularizer<T>>::name(&Entropy),
            Self::TsallisNonsteep => <TsallisNonSteep as Regularizer<T>>::name(&TsallisNonSteep),
        }
    }

    fn value(&self, block: &[T]) -> T {
        match self {
            Self::Entropy => Entropy.value(block),
            Self::TsallisNonsteep => TsallisNonSteep.value(block),
        }
    }

    fn gradient(&self, block: &[T], out: &mut [T]) {
        match self {
            Self::Entropy => Entropy.gradient(block, out),
            Self::TsallisNonsteep => TsallisNonSteep.gradient(block, out),
        }
    }

    fn is_steep(&self) -> bool {
        matches!(self, Self::Entropy)
    }

    fn max_value(&self, n: usize) -> T {
        match self {
            Self::Entropy => <Entropy as Regularizer<T>>::max_value(&Entropy, n),
            Self::TsallisNonsteep => {
                <TsallisNonSteep as Regularizer<T>>::max_value(&TsallisNonSteep, n)
            }
        }
    }

    fn smooth_argmax_into(
        &self,
        payoffs: &[T],
        beta: Temperature<T>,
        opts: &ArgmaxOptions<T>,
        out: &mut [T],
    ) -> Result<()> {
        match self {
            Self::Entropy => Entropy.smooth_argmax_into(payoffs, beta, opts, out),
            Self::TsallisNonsteep => TsallisNonSteep.smooth_argmax_into(payoffs, beta, opts, out),
        }
    }
}

/// How the per-block regularizer enters each player's payoff perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// `h^i(x) = Σ_j ψ(x^j)` for every player.
    Common,
    /// Two-player zero-sum form `h¹ = ψ(x¹) − ψ(x²) = −h²`.
    Opposed,
}

impl Coupling {
    /// `h^i` evaluated at a joint mixed action.
    pub fn player_value<T: Scalar, R: Regularizer<T> + ?Sized>(
        self,
        reg: &R,
        player: usize,
        profile: &[Vec<T>],
    ) -> T {
        match self {
            Self::Common => reg.profile_value(profile),
            Self::Opposed => {
                let h = reg.value(&profile[0]) - reg.value(&profile[1]);
                if player == 0 {
                    h
                } else {
                    -h
                }
            }
        }
    }
}

/// Shannon entropy summed over the players' blocks.
pub fn entropy<T: Scalar>(profile: &[Vec<T>]) -> T {
    Entropy.profile_value(profile)
}

/// Gradient of [`entropy`] with respect to player `i`'s block.
pub fn entropy_grad<T: Scalar>(profile: &[Vec<T>], player: usize) -> Vec<T> {
    let mut g = vec![T::zero(); profile[player].len()];
    Entropy.gradient(&profile[player], &mut g);
    g
}

fn logit_into<T: Scalar>(payoffs: &[T], beta: Temperature<T>, out: &mut [T]) {
    let max = payoffs.iter().copied().fold(T::neg_infinity(), T::max);
    let mut total = T::zero();
    for (o, &p) in out.iter_mut().zip(payoffs) {
        *o = ((p - max) / beta.get()).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Logit map `exp(p/β) / Σ exp(p/β)`, stabilized by subtracting the max.
pub fn logit_response<T: Scalar>(payoffs: &[T], beta: Temperature<T>) -> Vec<T> {
    let mut out = vec![T::zero(); payoffs.len()];
    logit_into(payoffs, beta, &mut out);
    out
}

/// Maximizes `⟨y, payoffs⟩ + β ψ(y)` over the simplex by damped entropic
/// mirror ascent: `log y ← log y + damping · g / β` then renormalize, where
/// `g = payoffs + β ∇ψ(y)`.
pub fn generic_smooth_argmax<T: Scalar, R: Regularizer<T> + ?Sized>(
    reg: &R,
    payoffs: &[T],
    beta: Temperature<T>,
    opts: &ArgmaxOptions<T>,
) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); payoffs.len()];
    generic_smooth_argmax_into(reg, payoffs, beta, opts, &mut out)?;
    Ok(out)
}

fn generic_smooth_argmax_into<T: Scalar, R: Regularizer<T> + ?Sized>(
    reg: &R,
    payoffs: &[T],
    beta: Temperature<T>,
    opts: &ArgmaxOptions<T>,
    out: &mut [T],
) -> Result<()> {
    let n = payoffs.len();
    if n == 1 {
        out[0] = T::one();
        return Ok(());
    }
    let b = beta.get();
    let mut log_y = vec![-T::lit(n as f64).ln(); n];
    let mut grad = vec![T::zero(); n];
    out.iter_mut()
        .for_each(|y| *y = T::one() / T::lit(n as f64));
    let mut residual = T::infinity();
    for _ in 0..opts.max_iterations {
        reg.gradient(out, &mut grad);
        let mut hi = T::neg_infinity();
        let mut lo = T::infinity();
        for (g, &p) in grad.iter_mut().zip(payoffs) {
            *g = p / b + *g;
            hi = hi.max(*g);
            lo = lo.min(*g);
        }
        residual = hi - lo;
        if residual <= opts.tol && out.iter().all(|&y| y > T::zero()) {
            return Ok(());
        }
        for (l, &g) in log_y.iter_mut().zip(&grad) {
            *l += opts.damping * g;
        }
        let norm = crate::scalar::log_sum_exp(&log_y);
        for (l, y) in log_y.iter_mut().zip(out.iter_mut()) {
            *l -= norm;
            *y = l.exp();
        }
    }
    Err(Error::NoConvergence {
        solver: "smooth argmax",
        iterations: opts.max_iterations,
        residual: residual.to_f64_lossy(),
    })
}
