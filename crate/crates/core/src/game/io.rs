//! Textual game files (JSON, numbers at 17 significant digits).

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{PayoffModel, StochasticGame};
use crate::error::{Error, Result};
use crate::scalar::{format_scalar, Scalar};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerEntry {
    action_count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct GameFile<T> {
    num_states: usize,
    players: Vec<PlayerEntry>,
    discount: T,
    rewards: Vec<Vec<Vec<T>>>,
    transitions: Vec<Vec<Vec<T>>>,
}

fn parse_error(source: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        message: message.into(),
    }
}

/// Parses a game file. `source_name` only labels error messages.
pub fn parse_game<T: Scalar>(text: &str, source_name: &str) -> Result<StochasticGame<T>> {
    let file: GameFile<T> =
        serde_json::from_str(text).map_err(|e| parse_error(source_name, e.to_string()))?;
    let counts: Vec<usize> = file.players.iter().map(|p| p.action_count).collect();
    if file.num_states == 0 {
        return Err(parse_error(
            source_name,
            "field `num_states` must be positive",
        ));
    }
    if counts.is_empty() || counts.contains(&0) {
        return Err(parse_error(
            source_name,
            "field `players` must list at least one player, each with action_count >= 1",
        ));
    }
    let joint: usize = counts.iter().product();
    let s = file.num_states;
    if file.rewards.len() != counts.len() {
        return Err(parse_error(
            source_name,
            format!(
                "field `rewards` has {} players, expected {}",
                file.rewards.len(),
                counts.len()
            ),
        ));
    }
    for (i, per_player) in file.rewards.iter().enumerate() {
        if per_player.len() != s {
            return Err(parse_error(
                source_name,
                format!(
                    "field `rewards[{i}]` has {} states, expected {s}",
                    per_player.len()
                ),
            ));
        }
        if let Some(k) = per_player.iter().position(|row| row.len() != joint) {
            return Err(parse_error(
                source_name,
                format!("field `rewards[{i}][{k}]` must have {joint} joint-action entries"),
            ));
        }
    }
    if file.transitions.len() != s {
        return Err(parse_error(
            source_name,
            format!(
                "field `transitions` has {} states, expected {s}",
                file.transitions.len()
            ),
        ));
    }
    for (k, per_state) in file.transitions.iter().enumerate() {
        if per_state.len() != joint {
            return Err(parse_error(
                source_name,
                format!("field `transitions[{k}]` must have {joint} joint-action rows"),
            ));
        }
        if let Some(a) = per_state.iter().position(|row| row.len() != s) {
            return Err(parse_error(
                source_name,
                format!("field `transitions[{k}][{a}]` must have {s} entries"),
            ));
        }
    }
    StochasticGame::from_nested(s, &counts, file.discount, &file.rewards, &file.transitions)
}

fn push_row<T: Scalar>(out: &mut String, row: &[T]) {
    out.push('[');
    for (k, &x) in row.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        out.push_str(&format_scalar(x));
    }
    out.push(']');
}

/// Serializes a game. Fails on non-finite entries, which JSON cannot carry.
pub fn write_game<T: Scalar>(game: &StochasticGame<T>) -> Result<String> {
    if !game.discount().is_finite()
        || game
            .rewards_flat()
            .iter()
            .chain(game.transitions_flat())
            .any(|x| !x.is_finite())
    {
        return Err(Error::InvalidParameter(
            "cannot serialize non-finite game entries".into(),
        ));
    }
    let s = game.num_states();
    let joint = game.joint_actions().size();
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"num_states\": {s},");
    out.push_str("  \"players\": [");
    for (i, p) in game.players().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{{\"action_count\": {}}}", p.action_count);
    }
    out.push_str("],\n");
    let _ = writeln!(out, "  \"discount\": {},", format_scalar(game.discount()));
    out.push_str("  \"rewards\": [\n");
    for i in 0..game.num_players() {
        out.push_str("    [\n");
        for state in 0..s {
            out.push_str("      ");
            push_row(&mut out, game.reward_slice(i, state));
            out.push_str(if state + 1 < s { ",\n" } else { "\n" });
        }
        out.push_str(if i + 1 < game.num_players() {
            "    ],\n"
        } else {
            "    ]\n"
        });
    }
    out.push_str("  ],\n");
    out.push_str("  \"transitions\": [\n");
    for state in 0..s {
        out.push_str("    [\n");
        for a in 0..joint {
            out.push_str("      ");
            push_row(&mut out, game.transition(state, a));
            out.push_str(if a + 1 < joint { ",\n" } else { "\n" });
        }
        out.push_str(if state + 1 < s { "    ],\n" } else { "    ]\n" });
    }
    out.push_str("  ]\n}\n");
    Ok(out)
}

pub fn save<T: Scalar>(game: &StochasticGame<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_game(game)?)?;
    Ok(())
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<StochasticGame<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_game(&text, &path.display().to_string())
}
