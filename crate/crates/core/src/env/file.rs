//! Single-line JSON world files (`gen --dump`, snapshot serialization).
//!
//! Cells are written row-major as `[object, colour, open]` code triples.
//! The config is echoed in full, including the dependency graph, so a file
//! reloads to an identical world.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::world::{GridWorld, Room};
use super::{Cell, Direction, EnvConfig, EnvError, Pos};
use crate::graph::{parse_spec, serialize_spec, Color, Template};

pub const WORLD_FORMAT: &str = "escaperoom-world";
const WORLD_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    template: Option<String>,
    seed: u64,
    max_steps: u32,
    drop_enabled: bool,
    room_size: u32,
    graph: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    x: i32,
    y: i32,
    dir: Direction,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldDoc {
    format: String,
    version: u32,
    config: ConfigDoc,
    episode: u64,
    width: i32,
    height: i32,
    cells: Vec<[u8; 3]>,
    rooms: Vec<Room>,
    agent: AgentDoc,
    carried: Option<Color>,
    steps: u32,
    terminated: bool,
    truncated: bool,
    colors: BTreeMap<Color, Color>,
}

fn bad(msg: impl Into<String>) -> EnvError {
    EnvError::WorldFile(msg.into())
}

impl GridWorld {
    pub fn to_world_file(&self) -> String {
        let graph = serde_json::from_str(&serialize_spec(&self.config.graph))
            .expect("canonical spec is valid JSON");
        let doc = WorldDoc {
            format: WORLD_FORMAT.to_string(),
            version: WORLD_VERSION,
            config: ConfigDoc {
                template: self.config.template.map(|t| t.to_string()),
                seed: self.config.seed,
                max_steps: self.config.max_steps,
                drop_enabled: self.config.drop_enabled,
                room_size: self.config.room_size,
                graph,
            },
            episode: self.episode,
            width: self.width,
            height: self.height,
            cells: self.grid.iter().map(|c| c.codes()).collect(),
            rooms: self.rooms.clone(),
            agent: AgentDoc {
                x: self.agent_pos.x,
                y: self.agent_pos.y,
                dir: self.agent_dir,
            },
            carried: self.carried,
            steps: self.steps,
            terminated: self.terminated,
            truncated: self.truncated,
            colors: self.colors.clone(),
        };
        serde_json::to_string(&doc).expect("world serializes")
    }

    pub fn from_world_file(text: &str) -> Result<GridWorld, EnvError> {
        let doc: WorldDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if doc.format != WORLD_FORMAT {
            return Err(bad(format!("unexpected format {:?}", doc.format)));
        }
        if doc.version != WORLD_VERSION {
            return Err(bad(format!("unsupported version {}", doc.version)));
        }
        let graph = parse_spec(&doc.config.graph.to_string()).map_err(|e| bad(e.to_string()))?;
        let template = doc
            .config
            .template
            .map(|t| t.parse::<Template>().map_err(|e| bad(e.to_string())))
            .transpose()?;
        let config = EnvConfig {
            graph,
            template,
            seed: doc.config.seed,
            max_steps: doc.config.max_steps,
            drop_enabled: doc.config.drop_enabled,
            room_size: doc.config.room_size,
        };
        config.validate()?;
        if doc.width < 1 || doc.height < 1 {
            return Err(bad("grid dimensions must be positive"));
        }
        if doc.cells.len() != (doc.width * doc.height) as usize {
            return Err(bad(format!(
                "expected {} cells, found {}",
                doc.width * doc.height,
                doc.cells.len()
            )));
        }
        let grid = doc
            .cells
            .iter()
            .enumerate()
            .map(|(i, &c)| Cell::from_codes(c).ok_or_else(|| bad(format!("bad cell {c:?} at {i}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let world = GridWorld {
            config,
            episode: doc.episode,
            width: doc.width,
            height: doc.height,
            grid,
            rooms: doc.rooms,
            agent_pos: Pos::new(doc.agent.x, doc.agent.y),
            agent_dir: doc.agent.dir,
            carried: doc.carried,
            steps: doc.steps,
            terminated: doc.terminated,
            truncated: doc.truncated,
            colors: doc.colors,
        };
        if !world.cell(world.agent_pos).is_some_and(Cell::passable) {
            return Err(bad("agent is not on a passable cell"));
        }
        if world.counts().exits != 1 {
            return Err(bad("world needs exactly one exit"));
        }
        Ok(world)
    }
}
