//! Goal-dependency graphs.
//!
//! A [`DependencyGraph`] is a DAG over one start node, one exit node, and
//! matched key/room pairs. Edges are prerequisites: `start -> key`,
//! `room -> key`, `key -> room` (same colour), and `start|room -> exit`.
//! Besides the edges, each graph records where every key physically lies
//! (`key_location`) and which room every door is entered from
//! (`door_host`), which is what the walk analysis and the gridworld need
//! to realize it.

mod spec;
mod templates;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use spec::{parse_spec, serialize_spec, GRAPH_SPEC_EXTENSION};
pub use templates::{load_template, Template, TEMPLATES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dependency cycle through {0}")]
    Cycle(String),
    #[error("colour mismatch on edge {from} -> {to}")]
    ColorMismatch { from: String, to: String },
    #[error("exit is not reachable from start: {0}")]
    Unreachable(String),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// The six key/door colours. Serialization codes are 1..=6; 0 means none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn code(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_code(code: u8) -> Option<Color> {
        match code {
            1..=6 => Some(Self::ALL[code as usize - 1]),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Purple => "purple",
            Color::Yellow => "yellow",
            Color::Grey => "grey",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| GraphError::InvalidArgument(format!("unknown colour {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Start,
    Key,
    Room,
    Exit,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Start => "start",
            NodeKind::Key => "key",
            NodeKind::Room => "room",
            NodeKind::Exit => "exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalNode {
    pub id: String,
    pub kind: NodeKind,
    pub color: Option<Color>,
}

impl GoalNode {
    pub fn new(id: impl Into<String>, kind: NodeKind, color: Option<Color>) -> Self {
        Self {
            id: id.into(),
            kind,
            color,
        }
    }

    pub fn start() -> Self {
        Self::new("start", NodeKind::Start, None)
    }

    pub fn exit() -> Self {
        Self::new("exit", NodeKind::Exit, None)
    }

    pub fn key(color: Color) -> Self {
        Self::new(format!("key_{color}"), NodeKind::Key, Some(color))
    }

    pub fn room(color: Color) -> Self {
        Self::new(format!("room_{color}"), NodeKind::Room, Some(color))
    }

    /// The goal this node stands for; `None` for the start node.
    pub fn goal(&self) -> Option<Goal> {
        match (self.kind, self.color) {
            (NodeKind::Key, Some(c)) => Some(Goal::Key(c)),
            (NodeKind::Room, Some(c)) => Some(Goal::Door(c)),
            (NodeKind::Exit, _) => Some(Goal::Exit),
            _ => None,
        }
    }

    fn sort_key(&self) -> (NodeKind, u8, &str) {
        (
            self.kind,
            self.color.map_or(0, Color::code),
            self.id.as_str(),
        )
    }
}

/// An achievable subgoal: pick up a key, open a door, or reach the exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "goal", content = "color", rename_all = "lowercase")]
pub enum Goal {
    Key(Color),
    Door(Color),
    Exit,
}

impl Goal {
    pub fn encode(self) -> GoalEncoding {
        let mut bits = [0u8; GoalEncoding::LEN];
        match self {
            Goal::Key(c) => {
                bits[c.code() as usize - 1] = 1;
                bits[6] = 1;
            }
            Goal::Door(c) => {
                bits[c.code() as usize - 1] = 1;
                bits[7] = 1;
            }
            Goal::Exit => bits[8] = 1,
        }
        GoalEncoding { bits }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Key(c) => write!(f, "{c} key"),
            Goal::Door(c) => write!(f, "{c} door"),
            Goal::Exit => f.write_str("exit"),
        }
    }
}

/// One-hot colour (6) followed by one-hot object kind (key, door, exit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalEncoding {
    pub bits: [u8; GoalEncoding::LEN],
}

impl GoalEncoding {
    pub const LEN: usize = 9;

    pub fn color_bits(&self) -> &[u8] {
        &self.bits[..6]
    }

    pub fn object_bits(&self) -> &[u8] {
        &self.bits[6..]
    }
}

pub fn encode_goal(node: &GoalNode) -> Result<GoalEncoding, GraphError> {
    node.goal()
        .map(Goal::encode)
        .ok_or_else(|| GraphError::InvalidArgument(format!("node {:?} is not a goal", node.id)))
}

/// Validated, canonically ordered goal-dependency graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<GoalNode>,
    edges: Vec<(String, String)>,
    key_location: BTreeMap<String, String>,
    door_host: BTreeMap<String, String>,
}

impl DependencyGraph {
    /// Validates and canonicalizes. Nodes are sorted by (kind, colour, id),
    /// edges by the positions of their endpoints.
    pub fn new(
        mut nodes: Vec<GoalNode>,
        edges: Vec<(String, String)>,
        key_location: BTreeMap<String, String>,
        door_host: BTreeMap<String, String>,
    ) -> Result<Self, GraphError> {
        nodes.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        if index.len() != nodes.len() {
            return Err(GraphError::Invalid("duplicate node id".into()));
        }
        let mut edges = edges;
        for (from, to) in &edges {
            for id in [from, to] {
                if !index.contains_key(id.as_str()) {
                    return Err(GraphError::Invalid(format!(
                        "edge references unknown node {id:?}"
                    )));
                }
            }
        }
        edges.sort_by_key(|(f, t)| (index[f.as_str()], index[t.as_str()]));
        let before = edges.len();
        edges.dedup();
        if edges.len() != before {
            return Err(GraphError::Invalid("duplicate edge".into()));
        }
        let graph = Self {
            nodes,
            edges,
            key_location,
            door_host,
        };
        graph.validate()?;
        Ok(graph)
    }

    pub fn nodes(&self) -> &[GoalNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn key_location(&self) -> &BTreeMap<String, String> {
        &self.key_location
    }

    pub fn door_host(&self) -> &BTreeMap<String, String> {
        &self.door_host
    }

    pub fn node(&self, id: &str) -> Option<&GoalNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn start(&self) -> &GoalNode {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Start)
            .expect("validated")
    }

    pub fn exit(&self) -> &GoalNode {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Exit)
            .expect("validated")
    }

    pub fn keys(&self) -> impl Iterator<Item = &GoalNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Key)
    }

    pub fn rooms(&self) -> impl Iterator<Item = &GoalNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Room)
    }

    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(f, _)| f == id)
            .map(|(_, t)| t.as_str())
    }

    pub fn predecessors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(_, t)| t == id)
            .map(|(f, _)| f.as_str())
    }

    /// The room a key opens.
    pub fn room_of_key(&self, key: &str) -> Option<&str> {
        let color = self.node(key)?.color?;
        self.rooms()
            .find(|r| r.color == Some(color))
            .map(|r| r.id.as_str())
    }

    /// The key that opens a room.
    pub fn key_of_room(&self, room: &str) -> Option<&str> {
        let color = self.node(room)?.color?;
        self.keys()
            .find(|k| k.color == Some(color))
            .map(|k| k.id.as_str())
    }

    /// Room (or start) from which the exit is entered.
    pub fn exit_host(&self) -> &str {
        self.predecessors(&self.exit().id)
            .next()
            .expect("validated")
    }

    /// Intermediate goals on the shortest start-to-exit dependency path.
    pub fn exit_depth(&self) -> usize {
        let start = self.start().id.as_str();
        let exit = self.exit().id.as_str();
        let mut dist: HashMap<&str, usize> = HashMap::from([(start, 0)]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if u == exit {
                return dist[u] - 1;
            }
            for v in self.successors(u) {
                if !dist.contains_key(v) {
                    dist.insert(v, dist[u] + 1);
                    queue.push_back(v);
                }
            }
        }
        unreachable!("validated graph has a path to the exit")
    }

    /// Out-degree of the start node.
    pub fn width(&self) -> usize {
        self.successors(&self.start().id).count()
    }

    /// Rooms in the order they become openable from the start, following
    /// `key_location`/`door_host`; ties broken by canonical node order.
    pub fn opening_order(&self) -> Vec<&str> {
        let mut accessible: HashSet<&str> = HashSet::from([self.start().id.as_str()]);
        let mut order = Vec::new();
        loop {
            let next = self.rooms().find(|r| {
                !accessible.contains(r.id.as_str())
                    && self.key_of_room(&r.id).is_some_and(|k| {
                        self.key_location
                            .get(k)
                            .is_some_and(|loc| accessible.contains(loc.as_str()))
                    })
                    && self
                        .door_host
                        .get(&r.id)
                        .is_some_and(|h| accessible.contains(h.as_str()))
            });
            match next {
                Some(r) => {
                    accessible.insert(r.id.as_str());
                    order.push(r.id.as_str());
                }
                None => return order,
            }
        }
    }

    fn validate(&self) -> Result<(), GraphError> {
        let starts = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Start)
            .count();
        let exits = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Exit)
            .count();
        if starts != 1 || exits != 1 {
            return Err(GraphError::Invalid(format!(
                "expected one start and one exit, found {starts} and {exits}"
            )));
        }
        for n in &self.nodes {
            let needs_color = matches!(n.kind, NodeKind::Key | NodeKind::Room);
            if needs_color != n.color.is_some() {
                return Err(GraphError::Invalid(format!(
                    "node {:?}: keys and rooms carry a colour, start and exit do not",
                    n.id
                )));
            }
        }
        for kind in [NodeKind::Key, NodeKind::Room] {
            let mut seen = HashSet::new();
            for n in self.nodes.iter().filter(|n| n.kind == kind) {
                if !seen.insert(n.color) {
                    return Err(GraphError::Invalid(format!(
                        "colour {} used by more than one {}",
                        n.color.expect("checked"),
                        kind.name()
                    )));
                }
            }
        }
        let key_colors: HashSet<_> = self.keys().map(|k| k.color).collect();
        let room_colors: HashSet<_> = self.rooms().map(|r| r.color).collect();
        if key_colors != room_colors {
            return Err(GraphError::Invalid(
                "every room needs exactly one key of its colour and vice versa".into(),
            ));
        }

        if let Some(cycle_at) = find_cycle(&self.nodes, &self.edges) {
            return Err(GraphError::Cycle(cycle_at));
        }

        for (from, to) in &self.edges {
            let f = self.node(from).expect("checked");
            let t = self.node(to).expect("checked");
            use NodeKind::*;
            match (f.kind, t.kind) {
                (Start, Key) | (Room, Key) | (Start, Exit) | (Room, Exit) => {}
                (Key, Room) => {
                    if f.color != t.color {
                        return Err(GraphError::ColorMismatch {
                            from: from.clone(),
                            to: to.clone(),
                        });
                    }
                }
                (Exit, _) => {
                    return Err(GraphError::Invalid(format!(
                        "exit has outgoing edge to {to:?}"
                    )))
                }
                (_, Start) => {
                    return Err(GraphError::Invalid(format!(
                        "start has incoming edge from {from:?}"
                    )))
                }
                _ => {
                    return Err(GraphError::Invalid(format!(
                        "edge {from:?} -> {to:?} ({} -> {}) is not a dependency",
                        f.kind.name(),
                        t.kind.name()
                    )))
                }
            }
        }
        for key in self.keys() {
            let room = self.room_of_key(&key.id).expect("colours matched");
            if !self.edges.iter().any(|(f, t)| f == &key.id && t == room) {
                return Err(GraphError::Invalid(format!(
                    "missing edge {:?} -> {room:?}",
                    key.id
                )));
            }
        }
        let exit = &self.exit().id;
        let exit_in = self.predecessors(exit).count();
        if exit_in != 1 {
            return Err(GraphError::Invalid(format!(
                "exit needs exactly one incoming edge, found {exit_in}"
            )));
        }

        for key in self.keys() {
            let loc = self.key_location.get(&key.id).ok_or_else(|| {
                GraphError::Invalid(format!("key {:?} has no key_location", key.id))
            })?;
            self.check_place(loc, "key_location")?;
            if !self.edges.iter().any(|(f, t)| f == loc && t == &key.id) {
                return Err(GraphError::Invalid(format!(
                    "key {:?} is located in {loc:?} but there is no edge {loc:?} -> {:?}",
                    key.id, key.id
                )));
            }
        }
        for room in self.rooms() {
            let host = self.door_host.get(&room.id).ok_or_else(|| {
                GraphError::Invalid(format!("room {:?} has no door_host", room.id))
            })?;
            self.check_place(host, "door_host")?;
            if host == &room.id {
                return Err(GraphError::Invalid(format!(
                    "room {:?} hosts its own door",
                    room.id
                )));
            }
        }
        for k in self.key_location.keys() {
            if self.node(k).map(|n| n.kind) != Some(NodeKind::Key) {
                return Err(GraphError::Invalid(format!(
                    "key_location entry for non-key {k:?}"
                )));
            }
        }
        for r in self.door_host.keys() {
            if self.node(r).map(|n| n.kind) != Some(NodeKind::Room) {
                return Err(GraphError::Invalid(format!(
                    "door_host entry for non-room {r:?}"
                )));
            }
        }

        let opened = self.opening_order();
        let exit_host = self.exit_host();
        if exit_host != self.start().id && !opened.contains(&exit_host) {
            return Err(GraphError::Unreachable(format!(
                "exit room {exit_host:?} can never be opened"
            )));
        }
        if opened.len() != self.rooms().count() {
            let stuck: Vec<_> = self
                .rooms()
                .filter(|r| !opened.contains(&r.id.as_str()))
                .map(|r| r.id.as_str())
                .collect();
            return Err(GraphError::Unreachable(format!(
                "rooms never openable: {stuck:?}"
            )));
        }
        Ok(())
    }

    fn check_place(&self, id: &str, field: &str) -> Result<(), GraphError> {
        match self.node(id).map(|n| n.kind) {
            Some(NodeKind::Start | NodeKind::Room) => Ok(()),
            _ => Err(GraphError::Invalid(format!(
                "{field} must name the start or a room, got {id:?}"
            ))),
        }
    }
}

/// Returns a node on a directed cycle, if any (Kahn's algorithm).
fn find_cycle(nodes: &[GoalNode], edges: &[(String, String)]) -> Option<String> {
    let mut indegree: HashMap<&str, usize> = nodes.iter().map(|n| (n.id.as_str(), 0)).collect();
    for (_, t) in edges {
        *indegree.get_mut(t.as_str())? += 1;
    }
    let mut queue: VecDeque<&str> = nodes
        .iter()
        .map(|n| n.id.as_str())
        .filter(|id| indegree[id] == 0)
        .collect();
    let mut removed = 0;
    while let Some(u) = queue.pop_front() {
        removed += 1;
        for (_, t) in edges.iter().filter(|(f, _)| f == u) {
            let d = indegree.get_mut(t.as_str()).expect("known");
            *d -= 1;
            if *d == 0 {
                queue.push_back(t);
            }
        }
    }
    if removed == nodes.len() {
        None
    } else {
        nodes
            .iter()
            .find(|n| indegree[n.id.as_str()] > 0)
            .map(|n| n.id.clone())
    }
}
