//! The seven EscapeRoom dependency graphs with up to four rooms.
//!
//! Placement convention: a key with a single incoming edge lies in that
//! predecessor; a key with several incoming edges lies in the start room
//! and the remaining edges only record alternative routes. Every door is
//! hosted by the room that holds its key.
//!
//! Template (e) as usually drawn also has `room_blue -> key_red`, which
//! closes the cycle red key, red room, blue key, blue room. It is left out
//! so the graph stays acyclic; the remaining edges still order the three
//! branches red, blue, purple.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{DependencyGraph, GoalNode, GraphError, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Template {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

pub const TEMPLATES: [Template; 7] = [
    Template::A,
    Template::B,
    Template::C,
    Template::D,
    Template::E,
    Template::F,
    Template::G,
];

impl Template {
    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }

    pub fn from_letter(c: char) -> Result<Self, GraphError> {
        TEMPLATES
            .into_iter()
            .find(|t| t.letter() == c.to_ascii_lowercase())
            .ok_or_else(|| GraphError::InvalidArgument(format!("unknown template {c:?}")))
    }

    pub fn graph(self) -> DependencyGraph {
        build(self.dependencies()).expect("shipped templates are valid")
    }

    /// `(from, to)` edges using `start`, `exit`, `k:<colour>` and `r:<colour>`.
    fn dependencies(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Template::A => &[("start", "k:red"), ("k:red", "r:red"), ("r:red", "exit")],
            Template::B => &[
                ("start", "k:blue"),
                ("k:blue", "r:blue"),
                ("start", "k:purple"),
                ("k:purple", "r:purple"),
                ("r:blue", "exit"),
                ("r:purple", "k:blue"),
            ],
            Template::C => &[
                ("start", "k:blue"),
                ("k:blue", "r:blue"),
                ("r:blue", "k:purple"),
                ("k:purple", "r:purple"),
                ("r:purple", "exit"),
            ],
            Template::D => &[
                ("start", "k:red"),
                ("k:red", "r:red"),
                ("start", "k:blue"),
                ("k:blue", "r:blue"),
                ("r:red", "k:purple"),
                ("k:purple", "r:purple"),
                ("r:blue", "exit"),
                ("r:red", "k:blue"),
                ("r:purple", "k:blue"),
            ],
            Template::E => &[
                ("start", "k:red"),
                ("k:red", "r:red"),
                ("start", "k:blue"),
                ("k:blue", "r:blue"),
                ("start", "k:purple"),
                ("k:purple", "r:purple"),
                ("r:purple", "exit"),
                ("r:red", "k:blue"),
                ("r:red", "k:purple"),
                ("r:blue", "k:purple"),
            ],
            Template::F => &[
                ("start", "k:red"),
                ("k:red", "r:red"),
                ("start", "k:blue"),
                ("k:blue", "r:blue"),
                ("r:red", "k:purple"),
                ("k:purple", "r:purple"),
                ("r:purple", "exit"),
                ("r:blue", "k:red"),
            ],
            Template::G => &[
                ("start", "k:blue"),
                ("k:blue", "r:blue"),
                ("r:blue", "k:red"),
                ("k:red", "r:red"),
                ("r:red", "k:purple"),
                ("k:purple", "r:purple"),
                ("r:purple", "exit"),
            ],
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Template {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Template::from_letter(c),
            _ => Err(GraphError::InvalidArgument(format!(
                "unknown template {s:?}"
            ))),
        }
    }
}

pub fn load_template(letter: &str) -> Result<DependencyGraph, GraphError> {
    Ok(letter.parse::<Template>()?.graph())
}

fn node_for(short: &str) -> GoalNode {
    match short.split_once(':') {
        Some(("k", c)) => GoalNode::key(c.parse().expect("template colour")),
        Some(("r", c)) => GoalNode::room(c.parse().expect("template colour")),
        _ if short == "start" => GoalNode::start(),
        _ => GoalNode::exit(),
    }
}

fn build(deps: &[(&str, &str)]) -> Result<DependencyGraph, GraphError> {
    let mut nodes: Vec<GoalNode> = Vec::new();
    for (f, t) in deps {
        for s in [f, t] {
            let n = node_for(s);
            if !nodes.contains(&n) {
                nodes.push(n);
            }
        }
    }
    let edges: Vec<(String, String)> = deps
        .iter()
        .map(|(f, t)| (node_for(f).id, node_for(t).id))
        .collect();

    let mut key_location = BTreeMap::new();
    for key in nodes.iter().filter(|n| n.kind == NodeKind::Key) {
        let preds: Vec<&str> = edges
            .iter()
            .filter(|(_, t)| t == &key.id)
            .map(|(f, _)| f.as_str())
            .collect();
        let loc = if preds.len() == 1 { preds[0] } else { "start" };
        key_location.insert(key.id.clone(), loc.to_string());
    }
    let mut door_host = BTreeMap::new();
    for room in nodes.iter().filter(|n| n.kind == NodeKind::Room) {
        let key = GoalNode::key(room.color.expect("room colour")).id;
        door_host.insert(room.id.clone(), key_location[&key].clone());
    }
    DependencyGraph::new(nodes, edges, key_location, door_host)
}
