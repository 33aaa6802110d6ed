//! The EscapeRoom gridworld.
//!
//! Rooms are axis-aligned rectangles that share walls. The start room sits
//! in the middle and every other room is attached to the room hosting its
//! door. Keys lie in the rooms given by the dependency graph's
//! `key_location`, and the exit lies in the room entered last. Colours are
//! permuted per episode.
//!
//! Cell channel codes: object `0 unseen, 1 floor, 2 wall, 3 door, 4 key,
//! 5 exit`; colour `0 none, 1 red, 2 green, 3 blue, 4 purple, 5 yellow,
//! 6 grey`; the third channel is 1 for an open door.

mod file;
mod generate;
pub mod nav;
mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, DependencyGraph, Template};
use crate::metrics::GoalEvent;

pub use file::WORLD_FORMAT;
pub use nav::{check_solvable, plan, PlanError};
pub use world::{GridWorld, ObjectCounts, Room};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: u32, reason: String },
    #[error("episode is over")]
    EpisodeOver,
    #[error("action {0} is not available")]
    InvalidAction(u8),
    #[error("world file: {0}")]
    WorldFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    MoveForward = 0,
    TurnLeft = 1,
    TurnRight = 2,
    PickUp = 3,
    Open = 4,
    Drop = 5,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::MoveForward,
        Action::TurnLeft,
        Action::TurnRight,
        Action::PickUp,
        Action::Open,
        Action::Drop,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Action> {
        Self::ALL.get(code as usize).copied()
    }

    /// Actions available in a world; `drop` only with `drop_enabled`.
    pub fn available(drop_enabled: bool) -> &'static [Action] {
        if drop_enabled {
            &Self::ALL
        } else {
            &Self::ALL[..5]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (0, -1),
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
        }
    }

    pub fn left(self) -> Direction {
        Self::ALL[(self as usize + 3) % 4]
    }

    pub fn right(self) -> Direction {
        Self::ALL[(self as usize + 1) % 4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn step(self, dir: Direction) -> Pos {
        let (dx, dy) = dir.delta();
        Pos::new(self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Floor,
    Wall,
    Door { color: Color, open: bool },
    Key(Color),
    Exit,
}

pub const OBJ_UNSEEN: u8 = 0;
pub const OBJ_FLOOR: u8 = 1;
pub const OBJ_WALL: u8 = 2;
pub const OBJ_DOOR: u8 = 3;
pub const OBJ_KEY: u8 = 4;
pub const OBJ_EXIT: u8 = 5;

impl Cell {
    pub fn codes(self) -> [u8; 3] {
        match self {
            Cell::Floor => [OBJ_FLOOR, 0, 0],
            Cell::Wall => [OBJ_WALL, 0, 0],
            Cell::Door { color, open } => [OBJ_DOOR, color.code(), open as u8],
            Cell::Key(color) => [OBJ_KEY, color.code(), 0],
            Cell::Exit => [OBJ_EXIT, 0, 0],
        }
    }

    pub fn from_codes(codes: [u8; 3]) -> Option<Cell> {
        let [obj, color, state] = codes;
        match (obj, Color::from_code(color), state) {
            (OBJ_FLOOR, None, 0) if color == 0 => Some(Cell::Floor),
            (OBJ_WALL, None, 0) if color == 0 => Some(Cell::Wall),
            (OBJ_DOOR, Some(c), 0 | 1) => Some(Cell::Door {
                color: c,
                open: state == 1,
            }),
            (OBJ_KEY, Some(c), 0) => Some(Cell::Key(c)),
            (OBJ_EXIT, None, 0) if color == 0 => Some(Cell::Exit),
            _ => None,
        }
    }

    /// The agent can stand here.
    pub fn passable(self) -> bool {
        matches!(
            self,
            Cell::Floor | Cell::Exit | Cell::Door { open: true, .. }
        )
    }

    /// Light passes through.
    pub fn transparent(self) -> bool {
        !matches!(self, Cell::Wall | Cell::Door { open: false, .. })
    }
}

pub const VIEW_SIZE: usize = 7;

/// Egocentric 7×7×3 view: `cells[row][col]`, row 0 farthest ahead, the
/// agent at row 6, column 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation {
    pub cells: [[[u8; 3]; VIEW_SIZE]; VIEW_SIZE],
}

impl Observation {
    pub const AGENT_ROW: usize = VIEW_SIZE - 1;
    pub const AGENT_COL: usize = VIEW_SIZE / 2;

    pub fn object(&self, row: usize, col: usize) -> u8 {
        self.cells[row][col][0]
    }

    /// Row-major flattening, channel fastest.
    pub fn flatten(&self) -> Vec<u8> {
        self.cells.iter().flatten().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub truncated: bool,
    pub events: Vec<GoalEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub graph: DependencyGraph,
    pub template: Option<Template>,
    pub seed: u64,
    pub max_steps: u32,
    pub drop_enabled: bool,
    /// Interior cells per room side.
    pub room_size: u32,
}

impl EnvConfig {
    pub const DEFAULT_MAX_STEPS: u32 = 1000;
    pub const DEFAULT_ROOM_SIZE: u32 = 6;

    pub fn new(graph: DependencyGraph, seed: u64) -> Self {
        Self {
            graph,
            template: None,
            seed,
            max_steps: Self::DEFAULT_MAX_STEPS,
            drop_enabled: false,
            room_size: Self::DEFAULT_ROOM_SIZE,
        }
    }

    pub fn for_template(template: Template, seed: u64) -> Self {
        Self {
            template: Some(template),
            ..Self::new(template.graph(), seed)
        }
    }

    pub fn with_max_steps(mut self, max_steps: u32) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_drop(mut self, drop_enabled: bool) -> Self {
        self.drop_enabled = drop_enabled;
        self
    }

    pub fn with_room_size(mut self, room_size: u32) -> Self {
        self.room_size = room_size;
        self
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.max_steps < 1 {
            return Err(EnvError::InvalidConfig("max_steps must be >= 1".into()));
        }
        if self.room_size < 3 {
            return Err(EnvError::InvalidConfig("room_size must be >= 3".into()));
        }
        if self.room_size > 64 {
            return Err(EnvError::InvalidConfig("room_size must be <= 64".into()));
        }
        Ok(())
    }

    /// Label used in traces: the template letter or `custom`.
    pub fn label(&self) -> String {
        self.template
            .map_or_else(|| "custom".to_string(), |t| t.to_string())
    }
}
