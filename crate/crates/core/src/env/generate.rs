//! Procedural layout and object placement.
//!
//! Rooms occupy slots of a square lattice; neighbouring slots share a wall.
//! The start room takes slot (0, 0) and every other room is attached, in
//! breadth-first order over `door_host`, to a random free side of its host.
//! A world that the oracle cannot solve is discarded and generation retries
//! with the next attempt seed.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use super::nav::check_solvable;
use super::world::{GridWorld, Room};
use super::{Cell, Direction, EnvConfig, EnvError, Pos};
use crate::graph::{Color, DependencyGraph};
use crate::rng::{mix, Rng, Stream};

pub(crate) const MAX_ATTEMPTS: u32 = 64;

pub(crate) fn episode_seed(seed: u64, episode: u64) -> u64 {
    mix(seed, episode)
}

pub(crate) fn generate_world(config: EnvConfig, episode: u64) -> Result<GridWorld, EnvError> {
    let seed = episode_seed(config.seed, episode);
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let attempt_seed = mix(seed, attempt as u64);
        match try_generate(&config, episode, attempt_seed) {
            Ok(world) => match check_solvable(&world) {
                Ok(_) => return Ok(world),
                Err(e) => last = format!("oracle could not solve layout: {e}"),
            },
            Err(reason) => last = reason,
        }
    }
    Err(EnvError::Generation {
        attempts: MAX_ATTEMPTS,
        reason: last,
    })
}

/// Rooms in breadth-first order over the door-host tree, with their host.
fn attach_order(graph: &DependencyGraph) -> Vec<(&str, Option<&str>)> {
    let start = graph.start().id.as_str();
    let mut order = vec![(start, None)];
    let mut queue = VecDeque::from([start]);
    while let Some(host) = queue.pop_front() {
        for room in graph.rooms() {
            if graph.door_host().get(&room.id).map(String::as_str) == Some(host) {
                order.push((room.id.as_str(), Some(host)));
                queue.push_back(room.id.as_str());
            }
        }
    }
    order
}

fn try_generate(config: &EnvConfig, episode: u64, seed: u64) -> Result<GridWorld, String> {
    let graph = &config.graph;
    let mut layout_rng = Rng::new(seed, Stream::WorldGen);
    let mut place_rng = Rng::new(seed, Stream::Placement);

    let mut shuffled = Color::ALL;
    layout_rng.shuffle(&mut shuffled);
    let colors: BTreeMap<Color, Color> = Color::ALL.into_iter().zip(shuffled).collect();

    // Slots.
    let mut slot_of: HashMap<&str, (i32, i32)> = HashMap::new();
    let mut taken: HashSet<(i32, i32)> = HashSet::new();
    let mut doors: Vec<(&str, &str, Direction)> = Vec::new();
    for (room, host) in attach_order(graph) {
        let slot = match host {
            None => (0, 0),
            Some(host) => {
                let (hx, hy) = slot_of[host];
                let free: Vec<Direction> = Direction::ALL
                    .into_iter()
                    .filter(|d| {
                        let (dx, dy) = d.delta();
                        !taken.contains(&(hx + dx, hy + dy))
                    })
                    .collect();
                let &side = layout_rng
                    .choose(&free)
                    .ok_or_else(|| format!("no free side on {host} for {room}"))?;
                doors.push((room, host, side));
                let (dx, dy) = side.delta();
                (hx + dx, hy + dy)
            }
        };
        slot_of.insert(room, slot);
        taken.insert(slot);
    }

    let span = config.room_size as i32 + 1;
    let min_x = taken.iter().map(|s| s.0).min().unwrap_or(0);
    let min_y = taken.iter().map(|s| s.1).min().unwrap_or(0);
    let max_x = taken.iter().map(|s| s.0).max().unwrap_or(0);
    let max_y = taken.iter().map(|s| s.1).max().unwrap_or(0);
    let width = (max_x - min_x + 1) * span + 1;
    let height = (max_y - min_y + 1) * span + 1;

    let mut rooms: Vec<Room> = attach_order(graph)
        .into_iter()
        .map(|(id, _)| {
            let (sx, sy) = slot_of[id];
            let x0 = (sx - min_x) * span;
            let y0 = (sy - min_y) * span;
            Room {
                id: id.to_string(),
                x0,
                y0,
                x1: x0 + span,
                y1: y0 + span,
            }
        })
        .collect();
    rooms.sort_by(|a, b| {
        let rank = |r: &Room| graph.nodes().iter().position(|n| n.id == r.id);
        rank(a).cmp(&rank(b))
    });
    let room = |id: &str| rooms.iter().find(|r| r.id == id).expect("placed room");

    let mut world = GridWorld {
        config: config.clone(),
        episode,
        width,
        height,
        grid: vec![Cell::Wall; (width * height) as usize],
        rooms: Vec::new(),
        agent_pos: Pos::new(0, 0),
        agent_dir: Direction::North,
        carried: None,
        steps: 0,
        terminated: false,
        truncated: false,
        colors: colors.clone(),
    };
    for r in &rooms {
        for p in r.interior() {
            world.set_cell(p, Cell::Floor);
        }
    }

    let mut door_cells = Vec::new();
    for &(id, host, side) in &doors {
        let h = room(host);
        let offset = 1 + layout_rng.below(config.room_size as usize) as i32;
        let p = match side {
            Direction::North => Pos::new(h.x0 + offset, h.y0),
            Direction::South => Pos::new(h.x0 + offset, h.y1),
            Direction::West => Pos::new(h.x0, h.y0 + offset),
            Direction::East => Pos::new(h.x1, h.y0 + offset),
        };
        let graph_color = graph.node(id).and_then(|n| n.color).expect("room colour");
        world.set_cell(
            p,
            Cell::Door {
                color: colors[&graph_color],
                open: false,
            },
        );
        door_cells.push(p);
    }

    let near_door = |p: Pos| {
        door_cells
            .iter()
            .any(|d| (d.x - p.x).abs() + (d.y - p.y).abs() <= 1)
    };
    let mut occupied: HashSet<Pos> = HashSet::new();
    let free_cell = |rng: &mut Rng, room_id: &str, occupied: &mut HashSet<Pos>| {
        let cells: Vec<Pos> = room(room_id)
            .interior()
            .filter(|&p| !near_door(p) && !occupied.contains(&p))
            .collect();
        let p = *rng
            .choose(&cells)
            .ok_or_else(|| format!("no free cell in {room_id}"))?;
        occupied.insert(p);
        Ok::<Pos, String>(p)
    };

    for key in graph.keys() {
        let loc = &graph.key_location()[&key.id];
        let p = free_cell(&mut place_rng, loc, &mut occupied)?;
        world.set_cell(p, Cell::Key(colors[&key.color.expect("key colour")]));
    }
    let exit = free_cell(&mut place_rng, graph.exit_host(), &mut occupied)?;
    world.set_cell(exit, Cell::Exit);
    world.agent_pos = free_cell(&mut place_rng, &graph.start().id, &mut occupied)?;
    world.agent_dir = Direction::ALL[place_rng.below(4)];
    world.rooms = rooms;
    Ok(world)
}
