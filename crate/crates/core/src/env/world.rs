use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::generate::generate_world;
use super::{
    Action, Cell, Direction, EnvConfig, EnvError, Observation, Pos, StepResult, OBJ_UNSEEN,
    VIEW_SIZE,
};
use crate::graph::{Color, Goal, NodeKind};
use crate::metrics::{EventKind, GoalEvent};

/// A room rectangle including its walls; `id` is the dependency-graph node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Room {
    pub fn contains_interior(&self, p: Pos) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }

    pub fn interior(&self) -> impl Iterator<Item = Pos> + '_ {
        (self.y0 + 1..self.y1)
            .flat_map(move |y| (self.x0 + 1..self.x1).map(move |x| Pos::new(x, y)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectCounts {
    pub keys_on_floor: usize,
    pub keys_carried: usize,
    pub doors: usize,
    pub closed_doors: usize,
    pub exits: usize,
}

/// Mutable world state. `Clone` gives an independent deep snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    pub(crate) config: EnvConfig,
    pub(crate) episode: u64,
    pub(crate) width: i32,
    pub(crate) height: i32,
    pub(crate) grid: Vec<Cell>,
    pub(crate) rooms: Vec<Room>,
    pub(crate) agent_pos: Pos,
    pub(crate) agent_dir: Direction,
    pub(crate) carried: Option<Color>,
    pub(crate) steps: u32,
    pub(crate) terminated: bool,
    pub(crate) truncated: bool,
    /// Graph colour → colour used in this episode.
    pub(crate) colors: BTreeMap<Color, Color>,
}

impl GridWorld {
    /// Generates episode 0 of `config`.
    pub fn generate(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        generate_world(config, 0)
    }

    /// Generates a specific episode; episodes are independent of each other.
    pub fn generate_episode(config: EnvConfig, episode: u64) -> Result<Self, EnvError> {
        config.validate()?;
        generate_world(config, episode)
    }

    /// Advances to the next episode and regenerates the world.
    pub fn reset(&mut self) -> Result<Observation, EnvError> {
        self.reset_to_episode(self.episode + 1)
    }

    pub fn reset_to_episode(&mut self, episode: u64) -> Result<Observation, EnvError> {
        *self = generate_world(self.config.clone(), episode)?;
        Ok(self.observe())
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn agent_pos(&self) -> Pos {
        self.agent_pos
    }

    pub fn agent_dir(&self) -> Direction {
        self.agent_dir
    }

    pub fn carried(&self) -> Option<Color> {
        self.carried
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// No further steps are accepted.
    pub fn is_over(&self) -> bool {
        self.terminated || self.truncated
    }

    pub fn colors(&self) -> &BTreeMap<Color, Color> {
        &self.colors
    }

    pub fn full_state(&self) -> GridWorld {
        self.clone()
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn cell(&self, p: Pos) -> Option<Cell> {
        self.in_bounds(p)
            .then(|| self.grid[(p.y * self.width + p.x) as usize])
    }

    pub(crate) fn set_cell(&mut self, p: Pos, cell: Cell) {
        let w = self.width;
        self.grid[(p.y * w + p.x) as usize] = cell;
    }

    pub fn cells(&self) -> impl Iterator<Item = (Pos, Cell)> + '_ {
        let w = self.width;
        self.grid
            .iter()
            .enumerate()
            .map(move |(i, &c)| (Pos::new(i as i32 % w, i as i32 / w), c))
    }

    pub fn front_pos(&self) -> Pos {
        self.agent_pos.step(self.agent_dir)
    }

    pub fn find_cell(&self, target: Cell) -> Option<Pos> {
        self.cells().find(|&(_, c)| c == target).map(|(p, _)| p)
    }

    pub fn door(&self, color: Color) -> Option<(Pos, bool)> {
        self.cells().find_map(|(p, c)| match c {
            Cell::Door { color: dc, open } if dc == color => Some((p, open)),
            _ => None,
        })
    }

    pub fn exit_pos(&self) -> Option<Pos> {
        self.find_cell(Cell::Exit)
    }

    pub fn counts(&self) -> ObjectCounts {
        let mut c = ObjectCounts {
            keys_on_floor: 0,
            keys_carried: self.carried.is_some() as usize,
            doors: 0,
            closed_doors: 0,
            exits: 0,
        };
        for (_, cell) in self.cells() {
            match cell {
                Cell::Key(_) => c.keys_on_floor += 1,
                Cell::Door { open, .. } => {
                    c.doors += 1;
                    c.closed_doors += !open as usize;
                }
                Cell::Exit => c.exits += 1,
                _ => {}
            }
        }
        c
    }

    /// Goal of a dependency-graph node in this episode's colours.
    pub fn goal_for_node(&self, node_id: &str) -> Option<Goal> {
        let node = self.config.graph.node(node_id)?;
        let world = |c: Option<Color>| c.and_then(|c| self.colors.get(&c).copied());
        match node.kind {
            NodeKind::Key => world(node.color).map(Goal::Key),
            NodeKind::Room => world(node.color).map(Goal::Door),
            NodeKind::Exit => Some(Goal::Exit),
            NodeKind::Start => None,
        }
    }

    /// Inverse of [`goal_for_node`](Self::goal_for_node).
    pub fn node_for_goal(&self, goal: Goal) -> Option<String> {
        let graph = &self.config.graph;
        let graph_color = |c: Color| self.colors.iter().find(|(_, &w)| w == c).map(|(&g, _)| g);
        let (kind, color) = match goal {
            Goal::Key(c) => (NodeKind::Key, Some(graph_color(c)?)),
            Goal::Door(c) => (NodeKind::Room, Some(graph_color(c)?)),
            Goal::Exit => (NodeKind::Exit, None),
        };
        graph
            .nodes()
            .iter()
            .find(|n| n.kind == kind && n.color == color)
            .map(|n| n.id.clone())
    }

    /// Key goals count as satisfied once the key is held or its door is open.
    pub fn is_goal_satisfied(&self, goal: Goal) -> bool {
        match goal {
            Goal::Key(c) => self.carried == Some(c) || self.door(c).is_some_and(|(_, open)| open),
            Goal::Door(c) => self.door(c).is_some_and(|(_, open)| open),
            Goal::Exit => self.terminated,
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        if self.is_over() {
            return Err(EnvError::EpisodeOver);
        }
        if action == Action::Drop && !self.config.drop_enabled {
            return Err(EnvError::InvalidAction(action.code()));
        }
        self.steps += 1;
        let mut reward = 0.0;
        let mut event = None;
        let front = self.front_pos();
        let ahead = self.cell(front);
        match action {
            Action::TurnLeft => self.agent_dir = self.agent_dir.left(),
            Action::TurnRight => self.agent_dir = self.agent_dir.right(),
            Action::MoveForward => {
                if let Some(cell) = ahead.filter(|c| c.passable()) {
                    self.agent_pos = front;
                    if cell == Cell::Exit {
                        self.terminated = true;
                        reward = 1.0;
                        event = Some(EventKind::ExitReached);
                    }
                }
            }
            Action::PickUp => {
                if let (Some(Cell::Key(color)), None) = (ahead, self.carried) {
                    self.carried = Some(color);
                    self.set_cell(front, Cell::Floor);
                    event = Some(EventKind::KeyPicked(color));
                }
            }
            Action::Open => {
                if let Some(Cell::Door { color, open: false }) = ahead {
                    if self.carried == Some(color) {
                        self.set_cell(front, Cell::Door { color, open: true });
                        self.carried = None;
                        event = Some(EventKind::DoorOpened(color));
                    }
                }
            }
            Action::Drop => {
                if let (Some(Cell::Floor), Some(color)) = (ahead, self.carried) {
                    self.set_cell(front, Cell::Key(color));
                    self.carried = None;
                }
            }
        }
        if !self.terminated && self.steps >= self.config.max_steps {
            self.truncated = true;
        }
        let events = event
            .map(|kind| {
                let node = self.node_for_goal(kind.goal());
                vec![GoalEvent::new(kind, self.steps, node)]
            })
            .unwrap_or_default();
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.terminated,
            truncated: self.truncated,
            events,
        })
    }

    /// Maps a view cell to a world position.
    pub fn view_to_world(&self, row: usize, col: usize) -> Pos {
        let ahead = (Observation::AGENT_ROW - row) as i32;
        let lateral = col as i32 - Observation::AGENT_COL as i32;
        let (fx, fy) = self.agent_dir.delta();
        let (rx, ry) = self.agent_dir.right().delta();
        Pos::new(
            self.agent_pos.x + fx * ahead + rx * lateral,
            self.agent_pos.y + fy * ahead + ry * lateral,
        )
    }

    /// Partial view in front of the agent. Visibility spreads from the
    /// agent's cell through 4-neighbours; walls and closed doors are seen
    /// but stop the spread.
    pub fn observe(&self) -> Observation {
        let mut cells = [[[OBJ_UNSEEN, 0, 0]; VIEW_SIZE]; VIEW_SIZE];
        let mut seen = [[false; VIEW_SIZE]; VIEW_SIZE];
        let start = (Observation::AGENT_ROW, Observation::AGENT_COL);
        seen[start.0][start.1] = true;
        let mut queue = VecDeque::from([start]);
        while let Some((row, col)) = queue.pop_front() {
            let Some(cell) = self.cell(self.view_to_world(row, col)) else {
                continue;
            };
            cells[row][col] = cell.codes();
            if !cell.transparent() {
                continue;
            }
            let neighbours = [
                (row.wrapping_sub(1), col),
                (row + 1, col),
                (row, col.wrapping_sub(1)),
                (row, col + 1),
            ];
            for (r, c) in neighbours {
                if r < VIEW_SIZE && c < VIEW_SIZE && !seen[r][c] {
                    seen[r][c] = true;
                    queue.push_back((r, c));
                }
            }
        }
        Observation { cells }
    }
}
