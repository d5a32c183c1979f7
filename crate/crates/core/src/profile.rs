//! Stationary profiles `x` and continuation values `u`.

use crate::error::{Error, Result};
use crate::game::GameClass;
use crate::regularizers::Coupling;
use crate::scalar::Scalar;

/// One mixed action per player per state, stored `[state][player][action]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryProfile<T> {
    states: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> StationaryProfile<T> {
    pub fn uniform(num_states: usize, action_counts: &[usize]) -> Self {
        let at_state: Vec<Vec<T>> = action_counts
            .iter()
            .map(|&n| vec![T::one() / T::lit(n as f64); n])
            .collect();
        Self {
            states: vec![at_state; num_states],
        }
    }

    pub fn from_nested(states: Vec<Vec<Vec<T>>>) -> Self {
        Self { states }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn at(&self, state: usize) -> &[Vec<T>] {
        &self.states[state]
    }

    #[inline]
    pub fn at_mut(&mut self, state: usize) -> &mut [Vec<T>] {
        &mut self.states[state]
    }

    pub fn as_nested(&self) -> &[Vec<Vec<T>>] {
        &self.states
    }

    /// Largest deviation of any block from the simplex (negative mass or
    /// row sum away from 1).
    pub fn simplex_defect(&self) -> T {
        let mut worst = T::zero();
        for block in self.states.iter().flatten() {
            let sum: T = block.iter().copied().sum();
            worst = worst.max((sum - T::one()).abs());
            for &p in block {
                worst = worst.max(-p);
            }
        }
        worst
    }

    /// `max_s max_i ‖x^i_s − y^i_s‖∞`.
    pub fn distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for (a, b) in self
            .states
            .iter()
            .flatten()
            .zip(other.states.iter().flatten())
        {
            for (&p, &q) in a.iter().zip(b) {
                d = d.max((p - q).abs());
            }
        }
        d
    }
}

/// Storage layout of the continuation values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueMode {
    /// One table read by every player (identical interest, single player).
    Shared,
    /// One table holding player 1's values; player 2 reads its negation.
    ZeroSum,
    /// One table per player.
    PerPlayer,
}

impl ValueMode {
    pub fn for_class<T>(class: &GameClass<T>) -> Self {
        match class {
            GameClass::ZeroSum => Self::ZeroSum,
            GameClass::IdenticalInterest => Self::Shared,
            GameClass::Team { .. } | GameClass::General => Self::PerPlayer,
        }
    }

    pub fn coupling(self) -> Coupling {
        match self {
            Self::ZeroSum => Coupling::Opposed,
            Self::Shared | Self::PerPlayer => Coupling::Common,
        }
    }
}

/// Continuation values `u^i(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationValues<T> {
    mode: ValueMode,
    num_players: usize,
    tables: Vec<Vec<T>>,
}

impl<T: Scalar> ContinuationValues<T> {
    pub fn zeros(mode: ValueMode, num_players: usize, num_states: usize) -> Self {
        let count = if mode == ValueMode::PerPlayer {
            num_players
        } else {
            1
        };
        Self {
            mode,
            num_players,
            tables: vec![vec![T::zero(); num_states]; count],
        }
    }

    pub fn from_tables(mode: ValueMode, num_players: usize, tables: Vec<Vec<T>>) -> Result<Self> {
        let want = if mode == ValueMode::PerPlayer {
            num_players
        } else {
            1
        };
        if tables.len() != want {
            return Err(Error::InvalidDimensions(format!(
                "{mode:?} values need {want} tables, got {}",
                tables.len()
            )));
        }
        if mode == ValueMode::ZeroSum && num_players != 2 {
            return Err(Error::InvalidDimensions(
                "zero-sum values need 2 players".into(),
            ));
        }
        Ok(Self {
            mode,
            num_players,
            tables,
        })
    }

    /// Shared single-table values, as used for one-player games.
    pub fn shared(values: Vec<T>, num_players: usize) -> Self {
        Self {
            mode: ValueMode::Shared,
            num_players,
            tables: vec![values],
        }
    }

    #[inline]
    pub fn mode(&self) -> ValueMode {
        self.mode
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_states(&self) -> usize {
        self.tables[0].len()
    }

    #[inline]
    pub fn num_tables(&self) -> usize {
        self.tables.len()
    }

    /// Player whose payoff defines table `k`.
    #[inline]
    pub fn table_owner(&self, k: usize) -> usize {
        match self.mode {
            ValueMode::PerPlayer => k,
            _ => 0,
        }
    }

    #[inline]
    pub fn table(&self, k: usize) -> &[T] {
        &self.tables[k]
    }

    #[inline]
    pub fn table_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.tables[k]
    }

    pub fn tables(&self) -> &[Vec<T>] {
        &self.tables
    }

    /// `u^i(s)`.
    #[inline]
    pub fn get(&self, player: usize, state: usize) -> T {
        match self.mode {
            ValueMode::Shared => self.tables[0][state],
            ValueMode::ZeroSum => {
                if player == 0 {
                    self.tables[0][state]
                } else {
                    -self.tables[0][state]
                }
            }
            ValueMode::PerPlayer => self.tables[player][state],
        }
    }

    /// Player `i`'s values as a vector over states.
    pub fn player_values(&self, player: usize) -> Vec<T> {
        (0..self.num_states())
            .map(|s| self.get(player, s))
            .collect()
    }

    pub fn sup_norm(&self) -> T {
        self.tables
            .iter()
            .map(|t| crate::scalar::sup_norm(t))
            .fold(T::zero(), T::max)
    }

    /// `max_k max_s |u_k(s) − v_k(s)|` over matching tables.
    pub fn distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for (a, b) in self.tables.iter().zip(&other.tables) {
            for (&x, &y) in a.iter().zip(b) {
                d = d.max((x - y).abs());
            }
        }
        d
    }

    /// Adds `c` to every entry of every table.
    pub fn shift(&mut self, c: T) {
        for t in &mut self.tables {
            for v in t.iter_mut() {
                *v += c;
            }
        }
    }
}
