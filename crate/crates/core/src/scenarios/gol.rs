//! Conway's Game of Life with one agent per cell.
//!
//! The grid is a torus. Agents run in index order and the state keeps two
//! buffers: agents see only `previousActivity`, their decisions accumulate
//! in `nextActivity`, and the buffers swap after the last agent's turn.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agent::Agent;
use crate::belief::{BeliefBase, Percepts};
use crate::environment::{Environment, HookError};
use crate::plan::{Action, Plan, PlanError};
use crate::trace::EnvState;
use crate::value::BeliefValue;

pub const DEFAULT_WIDTH: usize = 20;
pub const DEFAULT_HEIGHT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GolError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("expected {expected} cells for the grid, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("pattern line {line}: {message}")]
    Pattern { line: usize, message: String },
    #[error("a {pattern_width}x{pattern_height} pattern does not fit a {width}x{height} grid")]
    PatternTooLarge {
        pattern_width: usize,
        pattern_height: usize,
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cell index {index} outside a grid of {cells} cells")]
pub struct IndexError {
    pub index: usize,
    pub cells: usize,
}

/// Grid dimensions plus the initial activity, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolConfig {
    width: usize,
    height: usize,
    initial_activity: Vec<bool>,
}

impl GolConfig {
    pub fn new(width: usize, height: usize, initial_activity: Vec<bool>) -> Result<Self, GolError> {
        if width == 0 || height == 0 {
            return Err(GolError::EmptyGrid { width, height });
        }
        let expected = width * height;
        if initial_activity.len() != expected {
            return Err(GolError::CellCount {
                expected,
                actual: initial_activity.len(),
            });
        }
        Ok(GolConfig {
            width,
            height,
            initial_activity,
        })
    }

    /// Each cell active with probability 1/2.
    pub fn random(width: usize, height: usize, seed: u64) -> Result<Self, GolError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (0..width * height).map(|_| rng.gen_bool(0.5)).collect();
        GolConfig::new(width, height, cells)
    }

    /// Parses rows of `.` (inactive) and `#` (active). Blank lines are
    /// skipped; every row must have the same length.
    pub fn parse_pattern(text: &str) -> Result<Self, GolError> {
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    '#' => Ok(true),
                    '.' => Ok(false),
                    other => Err(GolError::Pattern {
                        line: i + 1,
                        message: format!("unexpected character {other:?}"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(GolError::Pattern {
                        line: i + 1,
                        message: format!("row has {} cells, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        GolConfig::new(width, height, rows.concat())
    }

    /// Copies this grid into the top-left corner of an empty
    /// `width`×`height` grid.
    pub fn placed_in(&self, width: usize, height: usize) -> Result<Self, GolError> {
        if self.width > width || self.height > height {
            return Err(GolError::PatternTooLarge {
                pattern_width: self.width,
                pattern_height: self.height,
                width,
                height,
            });
        }
        let mut cells = vec![false; width * height];
        for y in 0..self.height {
            for x in 0..self.width {
                cells[y * width + x] = self.initial_activity[y * self.width + x];
            }
        }
        GolConfig::new(width, height, cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn initial_activity(&self) -> &[bool] {
        &self.initial_activity
    }
}

fn count_active(index: usize, width: usize, height: usize, active: impl Fn(usize) -> bool) -> u8 {
    let (x, y) = (index % width, index / width);
    let mut n = 0;
    for dy in [height - 1, 0, 1] {
        for dx in [width - 1, 0, 1] {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = (x + dx) % width;
            let ny = (y + dy) % height;
            n += u8::from(active(ny * width + nx));
        }
    }
    n
}

/// Active cells among the eight Moore neighbours of `index` on a torus.
///
/// On grids narrower or shorter than three cells a neighbour can be
/// counted more than once, as wrapping makes it adjacent in several
/// directions.
pub fn determine_neighbor_activity(
    index: usize,
    activity: &[bool],
    width: usize,
    height: usize,
) -> Result<u8, IndexError> {
    let cells = width * height;
    if index >= cells || activity.len() != cells {
        return Err(IndexError { index, cells });
    }
    Ok(count_active(index, width, height, |i| activity[i]))
}

/// Survival with two or three active neighbours, birth with exactly three.
pub fn next_round_active(is_active: bool, neighbors: u8) -> bool {
    (is_active && (2..4).contains(&neighbors)) || neighbors == 3
}

pub fn next_round_action(active: bool) -> Action {
    Action::record([("nextRound", if active { "active" } else { "inActive" })])
}

/// The single cell plan: always active, decides the cell's next status from
/// `index` and `activityArray`.
pub fn gol_plan(width: usize, height: usize) -> Plan {
    Plan::always(move |beliefs: &BeliefBase| {
        let index = beliefs
            .value("index")
            .and_then(BeliefValue::as_i64)
            .ok_or_else(|| PlanError::missing("index"))?;
        let cells = beliefs
            .value("activityArray")
            .and_then(BeliefValue::as_list)
            .ok_or_else(|| PlanError::missing("activityArray"))?;
        let index = usize::try_from(index)
            .ok()
            .filter(|&i| i < cells.len() && cells.len() == width * height)
            .ok_or_else(|| {
                PlanError::new(format!("index {index} outside a {width}x{height} grid"))
            })?;
        let active = |i: usize| cells[i].as_bool().unwrap_or(false);
        let n = count_active(index, width, height, active);
        Ok(vec![next_round_action(next_round_active(active(index), n))])
    })
}

fn activity_value(cells: &[bool]) -> BeliefValue {
    BeliefValue::list(cells.iter().copied())
}

/// One agent per cell, ids `"0"`..`"N-1"`.
pub fn generate_agents(config: &GolConfig) -> Vec<Agent> {
    let plan = gol_plan(config.width, config.height);
    let activity = activity_value(&config.initial_activity);
    (0..config.initial_activity.len())
        .map(|index| {
            let beliefs = BeliefBase::new()
                .with("index", index)
                .and_then(|b| b.with("activityArray", activity.clone()))
                .expect("static keys are valid");
            Agent::new(index.to_string(), beliefs, vec![plan.clone()]).expect("numeric id")
        })
        .collect()
}

pub fn generate_state(config: &GolConfig) -> EnvState {
    let mut s = EnvState::new();
    s.insert("previousActivity".into(), activity_value(&config.initial_activity));
    s.insert("nextActivity".into(), BeliefValue::empty_list());
    s
}

/// Pushes the agent's decision onto `nextActivity`; after the last agent,
/// swaps the buffers.
pub fn gol_update_state(
    actions: &[Action],
    agent_id: &str,
    state: &EnvState,
) -> Result<EnvState, HookError> {
    let list = |key: &str| {
        state
            .get(key)
            .and_then(BeliefValue::as_list)
            .ok_or_else(|| HookError::new(format!("state lacks a {key} list")))
    };
    let previous = list("previousActivity")?;
    let next = list("nextActivity")?;
    let expected = next.len();
    if agent_id.parse::<usize>().ok() != Some(expected) || expected >= previous.len() {
        return Err(HookError::new(format!(
            "scheduling error: agent {agent_id:?} acted where agent {expected} was due"
        )));
    }
    let agent_active = actions
        .iter()
        .any(|a| a.field("nextRound").and_then(BeliefValue::as_str) == Some("active"));
    let mut grown = Vec::with_capacity(expected + 1);
    grown.extend_from_slice(next);
    grown.push(BeliefValue::Bool(agent_active));
    let mut out = state.clone();
    if expected + 1 == previous.len() {
        out.insert("previousActivity".into(), BeliefValue::List(Arc::new(grown)));
        out.insert("nextActivity".into(), BeliefValue::empty_list());
    } else {
        out.insert("nextActivity".into(), BeliefValue::List(Arc::new(grown)));
    }
    Ok(out)
}

/// Exposes only the previous generation.
pub fn gol_state_filter(state: &EnvState, _agent_id: &str) -> Percepts {
    let previous = state
        .get("previousActivity")
        .cloned()
        .unwrap_or_else(BeliefValue::empty_list);
    BeliefBase::new()
        .with("activityArray", previous)
        .expect("static key is valid")
}

pub fn gol_environment(config: &GolConfig) -> Environment {
    let agents = generate_agents(config)
        .into_iter()
        .map(|a| Box::new(a) as Box<dyn crate::environment::Participant>)
        .collect();
    Environment::builder(agents, generate_state(config))
        .update_state(gol_update_state)
        .state_filter(gol_state_filter)
        .build()
        .expect("ids are distinct indices")
}

/// `previousActivity` as booleans, if present and well-formed.
pub fn current_activity(state: &EnvState) -> Option<Vec<bool>> {
    state
        .get("previousActivity")?
        .as_list()?
        .iter()
        .map(BeliefValue::as_bool)
        .collect()
}

/// Text frame of a grid: `#` active, `.` inactive, one row per line.
pub struct Frame<'a> {
    pub width: usize,
    pub cells: &'a [bool],
}

impl fmt::Display for Frame<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.width.max(1)) {
            for &c in row {
                f.write_str(if c { "#" } else { "." })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}
