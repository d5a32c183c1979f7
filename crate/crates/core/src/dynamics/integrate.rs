use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fixed-step integration scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

/// Autonomous-or-not ODE `ẏ = F(t, y)` over a flat vector.
pub trait OdeSystem<T: Scalar> {
    fn dim(&self) -> usize;

    fn rhs(&self, t: T, y: &[T], dy: &mut [T]) -> Result<()>;

    /// Projection applied after every accepted step.
    fn post_step(&self, _t: T, _y: &mut [T]) -> Result<()> {
        Ok(())
    }
}

fn check_finite<T: Scalar>(t: T, y: &[T]) -> Result<()> {
    match y.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::NonFinite {
            time: t.to_f64_lossy(),
            detail: format!("component {k} is {}", y[k]),
        }),
    }
}

/// Integrates from `t0` to `t_end` with step `h`, calling `observe(t, y)`
/// after every step. The last step is shortened to land on `t_end`.
pub fn integrate<T, S, F>(
    system: &S,
    y0: &[T],
    t0: T,
    t_end: T,
    h: T,
    method: Method,
    mut observe: F,
) -> Result<Vec<T>>
where
    T: Scalar,
    S: OdeSystem<T> + ?Sized,
    F: FnMut(usize, T, &[T]) -> Result<()>,
{
    if !(h > T::zero()) {
        return Err(Error::Precondition(format!(
            "step size {h} must be positive"
        )));
    }
    if !(t_end - t0 >= h) {
        return Err(Error::Precondition(format!(
            "horizon {} is shorter than one step {h}",
            t_end - t0
        )));
    }
    if y0.len() != system.dim() {
        return Err(Error::InvalidDimensions(format!(
            "state has {} entries, system expects {}",
            y0.len(),
            system.dim()
        )));
    }
    check_finite(t0, y0)?;
    let n = y0.len();
    let steps = ((t_end - t0) / h).round().to_usize().unwrap_or(0).max(1);
    let mut y = y0.to_vec();
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    for k in 0..steps {
        let t = t0 + T::lit(k as f64) * h;
        let step = if k + 1 == steps { t_end - t } else { h };
        system.rhs(t, &y, &mut k1)?;
        match method {
            Method::Euler => {
                for (yi, &d) in y.iter_mut().zip(&k1) {
                    *yi += step * d;
                }
            }
            Method::Rk4 => {
                let half = step / two;
                for i in 0..n {
                    tmp[i] = y[i] + half * k1[i];
                }
                system.rhs(t + half, &tmp, &mut k2)?;
                for i in 0..n {
                    tmp[i] = y[i] + half * k2[i];
                }
                system.rhs(t + half, &tmp, &mut k3)?;
                for i in 0..n {
                    tmp[i] = y[i] + step * k3[i];
                }
                system.rhs(t + step, &tmp, &mut k4)?;
                for i in 0..n {
                    y[i] += step / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
                }
            }
        }
        let t_next = t + step;
        check_finite(t_next, &y)?;
        system.post_step(t_next, &mut y)?;
        observe(k + 1, t_next, &y)?;
    }
    Ok(y)
}
