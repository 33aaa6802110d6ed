use std::collections::HashSet;

use super::MetaController;
use crate::env::{GridWorld, Observation};
use crate::graph::{DependencyGraph, Goal, NodeKind};
use crate::rng::{mix, Rng, Stream};

struct Progress<'g> {
    graph: &'g DependencyGraph,
    accessible: HashSet<&'g str>,
    emitted: HashSet<&'g str>,
}

impl<'g> Progress<'g> {
    fn new(graph: &'g DependencyGraph) -> Self {
        Self {
            graph,
            accessible: HashSet::from([graph.start().id.as_str()]),
            emitted: HashSet::new(),
        }
    }

    /// Whether `node` can be achieved given what has been emitted so far.
    fn ready(&self, node: &str) -> bool {
        let g = self.graph;
        let Some(n) = g.node(node) else { return false };
        match n.kind {
            NodeKind::Start => false,
            NodeKind::Key => g
                .key_location()
                .get(node)
                .is_some_and(|loc| self.accessible.contains(loc.as_str())),
            NodeKind::Room => {
                g.key_of_room(node)
                    .is_some_and(|k| self.emitted.contains(k))
                    && g.door_host()
                        .get(node)
                        .is_some_and(|h| self.accessible.contains(h.as_str()))
            }
            NodeKind::Exit => self.accessible.contains(g.exit_host()),
        }
    }

    fn emit(&mut self, node: &'g str) {
        self.emitted.insert(node);
        if self
            .graph
            .node(node)
            .is_some_and(|n| n.kind == NodeKind::Room)
        {
            self.accessible.insert(node);
        }
    }
}

/// Goal nodes along a depth-first traversal from start with children in
/// random order, emitted on first visit and cut off at the exit.
///
/// A repair pass then moves any goal whose key location or door host is not
/// yet open behind the goals that open it; goals the traversal skipped but
/// that the exit depends on are filled in the same way.
pub fn dfs_goal_sequence(graph: &DependencyGraph, rng: &mut Rng) -> Vec<String> {
    let exit = graph.exit().id.as_str();
    let mut visited: HashSet<&str> = HashSet::from([graph.start().id.as_str()]);
    let mut raw: Vec<&str> = Vec::new();
    let mut stack: Vec<Vec<&str>> = vec![shuffled_children(graph, &graph.start().id, rng)];
    'walk: while let Some(children) = stack.last_mut() {
        let Some(child) = children.pop() else {
            stack.pop();
            continue;
        };
        if !visited.insert(child) {
            continue;
        }
        raw.push(child);
        if child == exit {
            break 'walk;
        }
        let next = shuffled_children(graph, child, rng);
        stack.push(next);
    }

    let mut progress = Progress::new(graph);
    let mut pending = raw;
    let mut out: Vec<&str> = Vec::new();
    while !progress.emitted.contains(exit) {
        if let Some(i) = pending.iter().position(|n| progress.ready(n)) {
            let n = pending.remove(i);
            progress.emit(n);
            out.push(n);
            continue;
        }
        // Stuck: pull in the first ready goal the traversal never reached.
        let extra = graph
            .nodes()
            .iter()
            .map(|n| n.id.as_str())
            .find(|n| !progress.emitted.contains(n) && !pending.contains(n) && progress.ready(n))
            .expect("validated graph can always make progress");
        pending.insert(0, extra);
    }
    out.into_iter().map(str::to_string).collect()
}

fn shuffled_children<'g>(graph: &'g DependencyGraph, node: &str, rng: &mut Rng) -> Vec<&'g str> {
    let mut children: Vec<&'g str> = graph
        .edges()
        .iter()
        .filter(|(f, _)| f == node)
        .map(|(_, t)| t.as_str())
        .collect();
    rng.shuffle(&mut children);
    // Popped from the back.
    children.reverse();
    children
}

/// Checks that a goal sequence is achievable in order and ends at the exit.
pub fn check_goal_order(graph: &DependencyGraph, seq: &[String]) -> Result<(), String> {
    let mut progress = Progress::new(graph);
    for (i, node) in seq.iter().enumerate() {
        let n = graph
            .node(node)
            .ok_or_else(|| format!("unknown node {node:?}"))?;
        if n.kind == NodeKind::Start {
            return Err("start is not a goal".into());
        }
        if progress.emitted.contains(node.as_str()) {
            return Err(format!("{node} appears twice"));
        }
        if !progress.ready(node) {
            return Err(format!(
                "{node} at position {i} comes before its prerequisites"
            ));
        }
        progress.emit(&n.id);
    }
    match seq.last() {
        Some(last) if *last == graph.exit().id => Ok(()),
        _ => Err("sequence must end with the exit".into()),
    }
}

/// Fixed meta-controller replaying a fresh depth-first goal sequence each
/// episode (`Rng::new(mix(seed, episode), Stream::Meta)`).
#[derive(Debug, Clone)]
pub struct DfsMeta {
    graph: DependencyGraph,
    seed: u64,
    sequence: Vec<String>,
    next: usize,
}

impl DfsMeta {
    pub fn new(graph: DependencyGraph, seed: u64) -> Self {
        let mut meta = Self {
            graph,
            seed,
            sequence: Vec::new(),
            next: 0,
        };
        meta.reset(0);
        meta
    }

    pub fn sequence(&self) -> &[String] {
        &self.sequence
    }
}

impl MetaController for DfsMeta {
    fn name(&self) -> &str {
        "dfs"
    }

    fn reset(&mut self, episode: u64) {
        let mut rng = Rng::new(mix(self.seed, episode), Stream::Meta);
        self.sequence = dfs_goal_sequence(&self.graph, &mut rng);
        self.next = 0;
    }

    fn next_goal(&mut self, _observation: &Observation, world: &GridWorld) -> Option<Goal> {
        let node = self.sequence.get(self.next)?;
        self.next += 1;
        world.goal_for_node(node)
    }
}
