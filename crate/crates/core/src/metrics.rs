//! Standard metric schema shared by discrete and continuous runs.

use crate::auxiliary::AuxiliaryContext;
use crate::error::Result;
use crate::game::StochasticGame;
use crate::oracles::equilibrium_residuals;
use crate::profile::{ContinuationValues, StationaryProfile, ValueMode};
use crate::regularizers::{ArgmaxOptions, Regularizer, Temperature};
use crate::scalar::Scalar;

/// Column names, in order, for a run over `num_states` states.
///
/// Value tables come first (`u{k}_s{s}`), then the value and best-response
/// residuals per state and their maxima, then duality gaps in zero-sum
/// mode, model errors for model-free runs, and the current value rate.
pub fn standard_columns(
    num_states: usize,
    mode: ValueMode,
    num_tables: usize,
    model_free: bool,
) -> Vec<String> {
    let mut cols = Vec::new();
    for k in 0..num_tables {
        for s in 0..num_states {
            cols.push(format!("u{k}_s{s}"));
        }
    }
    for name in ["rho_val", "rho_br"] {
        for s in 0..num_states {
            cols.push(format!("{name}_s{s}"));
        }
        cols.push(format!("{name}_max"));
    }
    if mode == ValueMode::ZeroSum {
        for s in 0..num_states {
            cols.push(format!("duality_gap_s{s}"));
        }
        cols.push("duality_gap_max".into());
    }
    if model_free {
        cols.push("q_err".into());
        cols.push("r_err".into());
    }
    cols.push("value_rate".into());
    cols
}

/// Everything the standard metrics are evaluated from.
pub struct Snapshot<'a, T> {
    pub profile: &'a StationaryProfile<T>,
    pub values: &'a ContinuationValues<T>,
    /// `(‖q̂ − q‖∞, ‖r̂ − r‖∞)` for model-free runs.
    pub model_errors: Option<(T, T)>,
    pub value_rate: T,
}

/// One metric row matching [`standard_columns`]; residuals and gaps are
/// measured against the true game.
pub fn standard_metrics<T: Scalar, R: Regularizer<T> + ?Sized>(
    game: &StochasticGame<T>,
    beta: Temperature<T>,
    reg: &R,
    options: &ArgmaxOptions<T>,
    snap: &Snapshot<'_, T>,
) -> Result<Vec<T>> {
    let mut row = Vec::new();
    for table in snap.values.tables() {
        row.extend_from_slice(table);
    }
    let res = equilibrium_residuals(game, beta, reg, options, snap.profile, snap.values)?;
    row.extend_from_slice(&res.value);
    row.push(res.max_value());
    row.extend_from_slice(&res.best_response);
    row.push(res.max_best_response());
    if snap.values.mode() == ValueMode::ZeroSum {
        let gaps = duality_gaps(game, beta, reg, options, snap.profile, snap.values)?;
        let max = gaps.iter().copied().fold(T::zero(), T::max);
        row.extend(gaps);
        row.push(max);
    }
    if let Some((q, r)) = snap.model_errors {
        row.push(q);
        row.push(r);
    }
    row.push(snap.value_rate);
    Ok(row)
}

/// Duality gap at every state against `model`.
pub fn duality_gaps<T, M, R>(
    model: &M,
    beta: Temperature<T>,
    reg: &R,
    options: &ArgmaxOptions<T>,
    profile: &StationaryProfile<T>,
    values: &ContinuationValues<T>,
) -> Result<Vec<T>>
where
    T: Scalar,
    M: crate::game::PayoffModel<T> + ?Sized,
    R: Regularizer<T> + ?Sized,
{
    let mut ctx = AuxiliaryContext::new(model, values, beta, reg);
    ctx.options = *options;
    (0..model.num_states())
        .map(|s| ctx.duality_gap(s, profile.at(s)).map(|g| g.value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_schema_for_zero_sum_model_free() {
        let cols = standard_columns(2, ValueMode::ZeroSum, 1, true);
        assert_eq!(
            cols.join(","),
            "u0_s0,u0_s1,rho_val_s0,rho_val_s1,rho_val_max,rho_br_s0,rho_br_s1,rho_br_max,\
             duality_gap_s0,duality_gap_s1,duality_gap_max,q_err,r_err,value_rate"
        );
    }

    #[test]
    fn per_player_schema_has_one_table_each() {
        let cols = standard_columns(1, ValueMode::PerPlayer, 2, false);
        assert_eq!(&cols[..2], &["u0_s0", "u1_s0"]);
        assert!(!cols.iter().any(|c| c.starts_with("duality_gap")));
    }
}
