use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::env::{Action, Cell, GridWorld};
use crate::graph::{Color, Goal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    KeyPicked(Color),
    DoorOpened(Color),
    ExitReached,
}

impl EventKind {
    pub fn goal(self) -> Goal {
        match self {
            EventKind::KeyPicked(c) => Goal::Key(c),
            EventKind::DoorOpened(c) => Goal::Door(c),
            EventKind::ExitReached => Goal::Exit,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::KeyPicked(_) => "key_picked",
            EventKind::DoorOpened(_) => "door_opened",
            EventKind::ExitReached => "exit_reached",
        }
    }

    pub fn color(self) -> Option<Color> {
        match self {
            EventKind::KeyPicked(c) | EventKind::DoorOpened(c) => Some(c),
            EventKind::ExitReached => None,
        }
    }
}

/// A goal achieved at `timestep` (the step count after the action).
/// `node` is the dependency-graph node the goal corresponds to.
///
/// Serialized flat: `{"kind":"key_picked","color":"blue","timestep":4,"node":"key_red"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EventDoc", into = "EventDoc")]
pub struct GoalEvent {
    pub kind: EventKind,
    pub timestep: u32,
    pub node: Option<String>,
}

impl GoalEvent {
    pub fn new(kind: EventKind, timestep: u32, node: Option<String>) -> Self {
        Self {
            kind,
            timestep,
            node,
        }
    }

    pub fn goal(&self) -> Goal {
        self.kind.goal()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    kind: String,
    color: Option<Color>,
    timestep: u32,
    node: Option<String>,
}

impl From<GoalEvent> for EventDoc {
    fn from(e: GoalEvent) -> Self {
        EventDoc {
            kind: e.kind.name().to_string(),
            color: e.kind.color(),
            timestep: e.timestep,
            node: e.node,
        }
    }
}

impl TryFrom<EventDoc> for GoalEvent {
    type Error = String;

    fn try_from(d: EventDoc) -> Result<Self, String> {
        let kind = match (d.kind.as_str(), d.color) {
            ("key_picked", Some(c)) => EventKind::KeyPicked(c),
            ("door_opened", Some(c)) => EventKind::DoorOpened(c),
            ("exit_reached", None) => EventKind::ExitReached,
            (k, c) => return Err(format!("bad event kind/colour: {k} {c:?}")),
        };
        Ok(GoalEvent::new(kind, d.timestep, d.node))
    }
}

/// Events implied by the transition `before --action--> after`, read off the
/// two snapshots alone.
pub fn detect_events(
    before: &GridWorld,
    action: Action,
    after: &GridWorld,
) -> Result<Vec<GoalEvent>, MetricsError> {
    let fail = |m: String| Err(MetricsError::Inconsistent(m));
    if before.is_over() {
        return fail("`before` is already over".into());
    }
    if after.steps() != before.steps() + 1 {
        return fail(format!(
            "step count {} -> {} is not one step",
            before.steps(),
            after.steps()
        ));
    }
    if (before.width(), before.height()) != (after.width(), after.height()) {
        return fail("grid dimensions differ".into());
    }
    let mut kinds = Vec::new();
    if let (None, Some(c)) = (before.carried(), after.carried()) {
        if action != Action::PickUp {
            return fail(format!("key appeared in hand after {action:?}"));
        }
        kinds.push(EventKind::KeyPicked(c));
    }
    for ((_, b), (_, a)) in before.cells().zip(after.cells()) {
        match (b, a) {
            (Cell::Door { color, open: false }, Cell::Door { open: true, .. }) => {
                if action != Action::Open {
                    return fail(format!("door opened by {action:?}"));
                }
                kinds.push(EventKind::DoorOpened(color));
            }
            (Cell::Door { open: true, .. }, Cell::Door { open: false, .. }) => {
                return fail("a door closed".into());
            }
            _ => {}
        }
    }
    if after.terminated() {
        if action != Action::MoveForward {
            return fail(format!("episode ended by {action:?}"));
        }
        kinds.push(EventKind::ExitReached);
    }
    if kinds.len() > 1 {
        return fail(format!("{} goal events in one step", kinds.len()));
    }
    Ok(kinds
        .into_iter()
        .map(|k| GoalEvent::new(k, after.steps(), after.node_for_goal(k.goal())))
        .collect())
}
