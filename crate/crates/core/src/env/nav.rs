//! Full-observability navigation used by the oracle controller and by the
//! generator's solvability check.
//!
//! Plans are shortest action sequences over (cell, heading) states. A plan
//! for a door includes fetching its key first. Every plan is replayed on a
//! clone of the world before it is returned, so a returned plan is known to
//! achieve its goal.

use std::collections::VecDeque;

use thiserror::Error;

use super::world::GridWorld;
use super::{Action, Cell, Direction, Pos};
use crate::graph::{Color, Goal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("goal {0} is not present in this world")]
    NotPresent(Goal),
    #[error("goal {goal} is unreachable: {reason}")]
    Unreachable { goal: Goal, reason: String },
    #[error("episode is over")]
    EpisodeOver,
}

impl PlanError {
    fn unreachable(goal: Goal, reason: impl Into<String>) -> Self {
        PlanError::Unreachable {
            goal,
            reason: reason.into(),
        }
    }
}

/// Per-goal step bound: every (cell, heading) pair at most once.
pub fn step_bound(world: &GridWorld) -> usize {
    (world.width() * world.height() * 4) as usize
}

/// Shortest sequence of turns and forward moves from the agent's pose to a
/// pose accepted by `done`. Only passable cells are entered; the exit only
/// when `allow_exit` is set.
fn navigate(
    world: &GridWorld,
    allow_exit: bool,
    done: impl Fn(Pos, Direction) -> bool,
) -> Option<Vec<Action>> {
    let w = world.width();
    let index = |p: Pos, d: Direction| ((p.y * w + p.x) * 4) as usize + d as usize;
    let n = step_bound(world);
    let mut prev: Vec<Option<(usize, Action)>> = vec![None; n];
    let mut seen = vec![false; n];
    let start = (world.agent_pos(), world.agent_dir());
    seen[index(start.0, start.1)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some((p, d)) = queue.pop_front() {
        if done(p, d) {
            let mut actions = Vec::new();
            let mut at = index(p, d);
            while let Some((from, a)) = prev[at] {
                actions.push(a);
                at = from;
            }
            actions.reverse();
            return Some(actions);
        }
        let mut next = vec![
            (p, d.left(), Action::TurnLeft),
            (p, d.right(), Action::TurnRight),
        ];
        let ahead = p.step(d);
        if let Some(cell) = world.cell(ahead) {
            if cell.passable() && (allow_exit || cell != Cell::Exit) {
                next.push((ahead, d, Action::MoveForward));
            }
        }
        for (q, e, a) in next {
            let i = index(q, e);
            if !seen[i] {
                seen[i] = true;
                prev[i] = Some((index(p, d), a));
                queue.push_back((q, e));
            }
        }
    }
    None
}

fn facing(target: Pos) -> impl Fn(Pos, Direction) -> bool {
    move |p, d| p.step(d) == target
}

fn run(world: &mut GridWorld, actions: &[Action]) {
    for &a in actions {
        world.step(a).expect("planned action is legal");
    }
}

/// Empties the agent's hands: opens the carried key's door if reachable,
/// else drops the key when dropping is enabled.
fn free_hands(world: &mut GridWorld, goal: Goal, plan: &mut Vec<Action>) -> Result<(), PlanError> {
    let Some(held) = world.carried() else {
        return Ok(());
    };
    if let Some((door, false)) = world.door(held) {
        if let Some(path) = navigate(world, false, facing(door)) {
            run(world, &path);
            run(world, &[Action::Open]);
            plan.extend(path);
            plan.push(Action::Open);
            return Ok(());
        }
    }
    if world.config().drop_enabled {
        let path = navigate(world, false, |p, d| {
            world.cell(p.step(d)) == Some(Cell::Floor)
        })
        .ok_or_else(|| PlanError::unreachable(goal, "no floor to drop the carried key"))?;
        run(world, &path);
        run(world, &[Action::Drop]);
        plan.extend(path);
        plan.push(Action::Drop);
        return Ok(());
    }
    Err(PlanError::unreachable(
        goal,
        format!("hands hold the {held} key and dropping is disabled"),
    ))
}

fn plan_into(world: &mut GridWorld, goal: Goal, plan: &mut Vec<Action>) -> Result<(), PlanError> {
    if world.is_goal_satisfied(goal) {
        return Ok(());
    }
    match goal {
        Goal::Key(c) => plan_key(world, c, plan),
        Goal::Door(c) => {
            let (door, _) = world.door(c).ok_or(PlanError::NotPresent(goal))?;
            if world.carried() != Some(c) {
                plan_key(world, c, plan)?;
            }
            let path = navigate(world, false, facing(door))
                .ok_or_else(|| PlanError::unreachable(goal, "no path to the door"))?;
            run(world, &path);
            run(world, &[Action::Open]);
            plan.extend(path);
            plan.push(Action::Open);
            Ok(())
        }
        Goal::Exit => {
            let exit = world.exit_pos().ok_or(PlanError::NotPresent(goal))?;
            let path = navigate(world, true, |p, _| p == exit)
                .ok_or_else(|| PlanError::unreachable(goal, "no path to the exit"))?;
            run(world, &path);
            plan.extend(path);
            Ok(())
        }
    }
}

fn plan_key(world: &mut GridWorld, c: Color, plan: &mut Vec<Action>) -> Result<(), PlanError> {
    let goal = Goal::Key(c);
    let key = world
        .find_cell(Cell::Key(c))
        .ok_or(PlanError::NotPresent(goal))?;
    // Fail before touching hands if the key cannot be reached at all.
    navigate(world, false, facing(key))
        .ok_or_else(|| PlanError::unreachable(goal, "no path to the key"))?;
    free_hands(world, goal, plan)?;
    let path = navigate(world, false, facing(key))
        .ok_or_else(|| PlanError::unreachable(goal, "no path to the key"))?;
    run(world, &path);
    run(world, &[Action::PickUp]);
    plan.extend(path);
    plan.push(Action::PickUp);
    Ok(())
}

/// Shortest-path action sequence achieving `goal` from the current state.
/// An already satisfied goal yields an empty plan.
pub fn plan(world: &GridWorld, goal: Goal) -> Result<Vec<Action>, PlanError> {
    if world.is_over() {
        return Err(PlanError::EpisodeOver);
    }
    let mut sim = world.clone();
    sim.config.max_steps = u32::MAX;
    let mut actions = Vec::new();
    plan_into(&mut sim, goal, &mut actions)?;
    debug_assert!(sim.is_goal_satisfied(goal));
    Ok(actions)
}

/// Solves the world goal by goal in the dependency graph's opening order
/// and returns the total number of actions.
pub fn check_solvable(world: &GridWorld) -> Result<usize, PlanError> {
    let graph = world.config().graph.clone();
    let mut sim = world.clone();
    sim.config.max_steps = u32::MAX;
    let mut goals = Vec::new();
    for room in graph.opening_order() {
        let door = world.goal_for_node(room).expect("room has a colour");
        let Goal::Door(c) = door else { unreachable!() };
        goals.push(Goal::Key(c));
        goals.push(door);
    }
    goals.push(Goal::Exit);
    let mut total = 0;
    for goal in goals {
        let mut actions = Vec::new();
        plan_into(&mut sim, goal, &mut actions)?;
        total += actions.len();
    }
    Ok(total)
}
