use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// State of the doubling-trick schedule: a constant value rate that is
/// shrunk, together with its trigger threshold, whenever the duality gap
/// falls below the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DoublingState<T> {
    pub rate: T,
    pub threshold: T,
    #[serde(default = "half")]
    pub shrink: T,
    /// Steps between two gap checks.
    #[serde(default = "default_check_interval")]
    pub check_interval: u64,
}

fn half<T: Scalar>() -> T {
    T::lit(0.5)
}

fn default_check_interval() -> u64 {
    1000
}

/// Value-update rate families `β_s(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Scalar")]
pub enum ValueRate<T> {
    /// `1/(n+1)`.
    Harmonic,
    /// Constant `β̄`.
    Constant {
        rate: T,
    },
    /// `scale / (1+n)^exponent`, exponent in `(0, 1]`.
    Power {
        scale: T,
        exponent: T,
    },
    Doubling(DoublingState<T>),
}

/// Value-rate schedule. With `per_visit`, `n` counts visits of the updated
/// state instead of global steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Schedule<T> {
    pub rate: ValueRate<T>,
    #[serde(default)]
    pub per_visit: bool,
}

impl<T: Scalar> Default for Schedule<T> {
    fn default() -> Self {
        Self {
            rate: ValueRate::Harmonic,
            per_visit: false,
        }
    }
}

impl<T: Scalar> Schedule<T> {
    pub fn new(rate: ValueRate<T>) -> Self {
        Self {
            rate,
            per_visit: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self.rate {
            ValueRate::Harmonic => Ok(()),
            ValueRate::Constant { rate } if !(rate >= T::zero() && rate <= T::one()) => {
                bad(format!("constant rate {rate} must lie in [0, 1]"))
            }
            ValueRate::Power { scale, exponent }
                if !(scale > T::zero() && scale <= T::one() && exponent > T::zero() && exponent <= T::one()) =>
            {
                bad(format!("power rate needs scale in (0, 1] and exponent in (0, 1], got {scale}, {exponent}"))
            }
            ValueRate::Doubling(d)
                if !(d.rate >= T::zero()
                    && d.rate <= T::one()
                    && d.threshold > T::zero()
                    && d.shrink > T::zero()
                    && d.shrink < T::one()
                    && d.check_interval > 0) =>
            {
                bad("doubling schedule needs rate in [0, 1], positive threshold, shrink in (0, 1) and a positive check interval".into())
            }
            _ => Ok(()),
        }
    }

    /// `β(n)`.
    pub fn rate(&self, n: u64) -> T {
        match self.rate {
            ValueRate::Harmonic => T::one() / T::lit(n as f64 + 1.0),
            ValueRate::Constant { rate } => rate,
            ValueRate::Power { scale, exponent } => scale / T::lit(n as f64 + 1.0).powf(exponent),
            ValueRate::Doubling(d) => d.rate,
        }
    }

    pub fn doubling(&self) -> Option<&DoublingState<T>> {
        match &self.rate {
            ValueRate::Doubling(d) => Some(d),
            _ => None,
        }
    }

    pub fn doubling_mut(&mut self) -> Option<&mut DoublingState<T>> {
        match &mut self.rate {
            ValueRate::Doubling(d) => Some(d),
            _ => None,
        }
    }
}

/// Shrinks the rate and the threshold once the max-over-states duality
/// gap drops below the threshold. Returns whether it fired.
pub fn doubling_trick_update<T: Scalar>(state: &mut DoublingState<T>, gap: T) -> bool {
    if gap < state.threshold {
        state.rate *= state.shrink;
        state.threshold *= state.shrink;
        true
    } else {
        false
    }
}
