use std::collections::{BTreeSet, HashMap, VecDeque};

use super::WalkError;
use crate::graph::{DependencyGraph, NodeKind};

/// Where the walker is inside one opened-doors level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    /// Standing in the start room or an opened room.
    Room(String),
    /// Transient state: holding this key on the way to its door.
    Key(String),
    Exit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WalkState {
    /// Rooms whose doors are open.
    pub opened: BTreeSet<String>,
    pub place: Place,
}

impl WalkState {
    pub fn is_exit(&self) -> bool {
        self.place == Place::Exit
    }

    pub fn label(&self) -> String {
        let place = match &self.place {
            Place::Room(r) => r.clone(),
            Place::Key(k) => k.clone(),
            Place::Exit => return "exit".into(),
        };
        let opened: Vec<&str> = self.opened.iter().map(String::as_str).collect();
        format!("{place}@{{{}}}", opened.join(","))
    }
}

/// Random-walk state graph: advance edges only. Staying and restarting
/// are implied by the walk parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    states: Vec<WalkState>,
    edges: Vec<Vec<usize>>,
    root: usize,
    exit: usize,
}

impl AugmentedGraph {
    /// Builds from explicit parts; every non-exit state needs an outgoing
    /// edge and the exit none.
    pub fn from_parts(
        states: Vec<WalkState>,
        edges: Vec<Vec<usize>>,
        root: usize,
        exit: usize,
    ) -> Result<Self, WalkError> {
        let n = states.len();
        if edges.len() != n || root >= n || exit >= n || root == exit {
            return Err(WalkError::Construction(
                "inconsistent state/edge tables".into(),
            ));
        }
        for (i, out) in edges.iter().enumerate() {
            if out.iter().any(|&j| j >= n) {
                return Err(WalkError::Construction(format!(
                    "edge out of range from {i}"
                )));
            }
            if i == exit && !out.is_empty() {
                return Err(WalkError::Construction("exit must be absorbing".into()));
            }
            if i != exit && out.is_empty() {
                return Err(WalkError::Construction(format!(
                    "state {} has no outgoing advance edge",
                    states[i].label()
                )));
            }
        }
        Ok(Self {
            states,
            edges,
            root,
            exit,
        })
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[WalkState] {
        &self.states
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.edges[i]
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn exit_index(&self) -> usize {
        self.exit
    }

    pub fn index_of(&self, state: &WalkState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Expands a dependency graph into the augmented walk graph.
///
/// At each level (set of opened rooms) the walker can be in the start room
/// or any opened room, moving along door connections in both directions.
/// From a room it can step onto any unused key that the dependency graph
/// lists as a successor of that room; from a key state it goes through the
/// key's door into the next level. The exit is entered from its host room.
/// With `drop_key`, each key state also leads back to the room where the
/// key lies.
pub fn augment(graph: &DependencyGraph, drop_key: bool) -> AugmentedGraph {
    let start = graph.start().id.clone();
    let exit_host = graph.exit_host().to_string();
    let rooms: Vec<String> = graph.rooms().map(|r| r.id.clone()).collect();

    let root = WalkState {
        opened: BTreeSet::new(),
        place: Place::Room(start.clone()),
    };
    let exit = WalkState {
        opened: BTreeSet::new(),
        place: Place::Exit,
    };

    let mut states = vec![root.clone()];
    let mut index: HashMap<WalkState, usize> = HashMap::from([(root, 0)]);
    let mut edges: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);

    let mut intern = |s: WalkState,
                      states: &mut Vec<WalkState>,
                      edges: &mut Vec<Vec<usize>>,
                      queue: &mut VecDeque<usize>| {
        if let Some(&i) = index.get(&s) {
            return i;
        }
        let i = states.len();
        index.insert(s.clone(), i);
        states.push(s);
        edges.push(Vec::new());
        queue.push_back(i);
        i
    };

    while let Some(i) = queue.pop_front() {
        let state = states[i].clone();
        let mut outs: Vec<WalkState> = Vec::new();
        match &state.place {
            Place::Exit => continue,
            Place::Key(key) => {
                let room = graph.room_of_key(key).expect("validated").to_string();
                let mut opened = state.opened.clone();
                opened.insert(room.clone());
                outs.push(WalkState {
                    opened,
                    place: Place::Room(room),
                });
                if drop_key {
                    outs.push(WalkState {
                        opened: state.opened.clone(),
                        place: Place::Room(graph.key_location()[key].clone()),
                    });
                }
            }
            Place::Room(here) => {
                for r in rooms.iter().filter(|r| state.opened.contains(*r)) {
                    let host = &graph.door_host()[r];
                    if host == here {
                        outs.push(WalkState {
                            opened: state.opened.clone(),
                            place: Place::Room(r.clone()),
                        });
                    } else if r == here {
                        outs.push(WalkState {
                            opened: state.opened.clone(),
                            place: Place::Room(host.clone()),
                        });
                    }
                }
                for succ in graph.successors(here) {
                    let node = graph.node(succ).expect("validated");
                    if node.kind != NodeKind::Key {
                        continue;
                    }
                    let room = graph.room_of_key(succ).expect("validated");
                    let accessible = |id: &str| id == start || state.opened.contains(id);
                    if !state.opened.contains(room)
                        && accessible(&graph.key_location()[succ])
                        && accessible(&graph.door_host()[room])
                    {
                        outs.push(WalkState {
                            opened: state.opened.clone(),
                            place: Place::Key(succ.to_string()),
                        });
                    }
                }
                if *here == exit_host {
                    outs.push(exit.clone());
                }
            }
        }
        let mut targets = Vec::with_capacity(outs.len());
        for s in outs {
            let j = intern(s, &mut states, &mut edges, &mut queue);
            if !targets.contains(&j) {
                targets.push(j);
            }
        }
        edges[i] = targets;
    }

    let exit_index = states
        .iter()
        .position(WalkState::is_exit)
        .expect("exit reachable");
    AugmentedGraph::from_parts(states, edges, 0, exit_index)
        .expect("augmentation of a validated graph is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_template, GoalNode};
    use std::collections::BTreeMap;

    fn state(opened: &[&str], place: Place) -> WalkState {
        WalkState {
            opened: opened.iter().map(|s| s.to_string()).collect(),
            place,
        }
    }

    fn room(id: &str) -> Place {
        Place::Room(id.into())
    }

    #[test]
    fn template_c_matches_level_diagram() {
        let aug = augment(&load_template("c").unwrap(), false);
        assert_eq!(aug.n(), 9);
        let b = "room_blue";
        let p = "room_purple";
        let expected = [
            state(&[], room("start")),
            state(&[], Place::Key("key_blue".into())),
            state(&[b], room("start")),
            state(&[b], room(b)),
            state(&[b], Place::Key("key_purple".into())),
            state(&[b, p], room("start")),
            state(&[b, p], room(b)),
            state(&[b, p], room(p)),
        ];
        for s in &expected {
            assert!(aug.index_of(s).is_some(), "missing {}", s.label());
        }
        let idx = |s: &WalkState| aug.index_of(s).unwrap();
        // Start at level {room_blue} only reaches room_blue (key_blue is spent).
        assert_eq!(aug.successors(idx(&expected[2])), &[idx(&expected[3])]);
        // room_purple is the exit host.
        assert!(aug
            .successors(idx(&expected[7]))
            .contains(&aug.exit_index()));
    }

    #[test]
    fn start_to_exit_has_two_states() {
        let g = DependencyGraph::new(
            vec![GoalNode::start(), GoalNode::exit()],
            vec![("start".into(), "exit".into())],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let aug = augment(&g, false);
        assert_eq!(aug.n(), 2);
        assert_eq!(aug.successors(aug.root_index()), &[aug.exit_index()]);
    }

    #[test]
    fn template_a_has_five_states() {
        assert_eq!(augment(&load_template("a").unwrap(), false).n(), 5);
    }

    #[test]
    fn drop_adds_return_edges_only() {
        for letter in ["a", "b", "c", "d", "e", "f", "g"] {
            let g = load_template(letter).unwrap();
            let plain = augment(&g, false);
            let dropped = augment(&g, true);
            assert_eq!(plain.n(), dropped.n(), "template {letter}");
            for (i, s) in dropped.states().iter().enumerate() {
                let expected = if matches!(s.place, Place::Key(_)) {
                    2
                } else {
                    plain.successors(plain.index_of(s).unwrap()).len()
                };
                assert_eq!(
                    dropped.successors(i).len(),
                    expected,
                    "{letter} {}",
                    s.label()
                );
            }
        }
    }

    #[test]
    fn every_state_reaches_exit() {
        for letter in ["a", "b", "c", "d", "e", "f", "g"] {
            let aug = augment(&load_template(letter).unwrap(), false);
            // Reverse reachability from exit over advance edges.
            let mut reach = vec![false; aug.n()];
            reach[aug.exit_index()] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for i in 0..aug.n() {
                    if !reach[i] && aug.successors(i).iter().any(|&j| reach[j]) {
                        reach[i] = true;
                        changed = true;
                    }
                }
            }
            assert!(reach.iter().all(|&r| r), "template {letter}");
        }
    }

    #[test]
    fn from_parts_rejects_dead_end() {
        let states = vec![state(&[], room("start")), state(&[], Place::Exit)];
        let err = AugmentedGraph::from_parts(states, vec![vec![], vec![]], 0, 1).unwrap_err();
        assert!(matches!(err, WalkError::Construction(_)));
    }
}
