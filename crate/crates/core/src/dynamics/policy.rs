use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default floor on the state rates.
pub const DEFAULT_LAMBDA_FLOOR: f64 = 0.2;

/// How `λ_s(t)` is selected inside `[floor, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaRule<T> {
    /// `λ_s(t) = floor`.
    Floor,
    /// `λ_s(t) = 1`.
    One,
    /// Fixed per-state values.
    PerState { values: Vec<T> },
    /// `floor + (1 − floor)(1 + sin(2π t / period + s))/2`.
    Sinusoidal { period: T },
}

/// Selection of the state rates `λ_s(t) ∈ [floor, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LambdaPolicy<T> {
    pub floor: T,
    pub rule: LambdaRule<T>,
}

impl<T: Scalar> Default for LambdaPolicy<T> {
    fn default() -> Self {
        Self {
            floor: T::lit(DEFAULT_LAMBDA_FLOOR),
            rule: LambdaRule::Floor,
        }
    }
}

impl<T: Scalar> LambdaPolicy<T> {
    pub fn new(floor: T, rule: LambdaRule<T>) -> Result<Self> {
        let policy = Self { floor, rule };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor > T::zero() && self.floor <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "lambda floor {} must lie in (0, 1]",
                self.floor
            )));
        }
        match &self.rule {
            LambdaRule::PerState { values } => {
                if let Some(v) = values
                    .iter()
                    .find(|&&v| !(v >= self.floor && v <= T::one()))
                {
                    return Err(Error::InvalidParameter(format!(
                        "per-state lambda {v} outside [{}, 1]",
                        self.floor
                    )));
                }
            }
            LambdaRule::Sinusoidal { period } if !(*period > T::zero()) => {
                return Err(Error::InvalidParameter(
                    "sinusoidal period must be positive".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// `λ_s(t)`.
    pub fn rate(&self, state: usize, t: T) -> T {
        match &self.rule {
            LambdaRule::Floor => self.floor,
            LambdaRule::One => T::one(),
            LambdaRule::PerState { values } => values[state % values.len()],
            LambdaRule::Sinusoidal { period } => {
                let phase = T::lit(2.0 * std::f64::consts::PI) * t / *period + T::lit(state as f64);
                self.floor + (T::one() - self.floor) * (T::one() + phase.sin()) * T::lit(0.5)
            }
        }
    }
}

/// Value rates `β(t)` in continuous time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateFunction<T> {
    /// `1/(t+1)`.
    Harmonic,
    Constant {
        rate: T,
    },
    /// `scale/(1+t)^exponent`.
    Power {
        scale: T,
        exponent: T,
    },
}

impl<T: Scalar> RateFunction<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { rate } if !(rate > T::zero() && rate.is_finite()) => Err(
                Error::InvalidParameter(format!("constant rate {rate} must be positive")),
            ),
            Self::Power { scale, exponent }
                if !(scale > T::zero() && exponent > T::zero() && exponent <= T::one()) =>
            {
                Err(Error::InvalidParameter(
                    "power rate needs positive scale and exponent in (0, 1]".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn rate(&self, t: T) -> T {
        match *self {
            Self::Harmonic => T::one() / (t + T::one()),
            Self::Constant { rate } => rate,
            Self::Power { scale, exponent } => scale / (T::one() + t).powf(exponent),
        }
    }
}
