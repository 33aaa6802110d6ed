use super::{check_goal_order, AgentError, Policy, PolicyInput, RewardMode, Transition};
use crate::env::{Action, GridWorld};
use crate::metrics::{EpisodeTrace, EventKind, StepRecord};

/// Runs one episode of a single-level policy on a freshly reset `world`.
///
/// The reward handed to the update hook is the environment reward plus, in
/// bonus mode, 1 per intermediate goal event; the trace keeps the two parts
/// in its `extrinsic` and `intrinsic` columns. In sketch mode the policy's
/// goal is the current entry of `sketch` (graph node ids), and the pointer
/// moves on exactly when that goal's event occurs.
pub fn run_flat_episode(
    world: &mut GridWorld,
    policy: &mut dyn Policy,
    mode: RewardMode,
    sketch: Option<&[String]>,
) -> Result<EpisodeTrace, AgentError> {
    if world.steps() != 0 || world.is_over() {
        return Err(AgentError::InvalidArgument(
            "episode already started".into(),
        ));
    }
    match (mode, sketch) {
        (RewardMode::Sketch, Some(seq)) => {
            check_goal_order(&world.config().graph, seq).map_err(AgentError::InvalidSketch)?
        }
        (RewardMode::Sketch, None) => {
            return Err(AgentError::InvalidArgument(
                "sketch mode needs a goal sequence".into(),
            ))
        }
        (_, Some(_)) => {
            return Err(AgentError::InvalidArgument(format!(
                "{mode} mode takes no sketch"
            )))
        }
        (_, None) => {}
    }
    let sketch = sketch.unwrap_or(&[]);
    policy.reset(world.episode());
    let legal = Action::available(world.config().drop_enabled);
    let mut trace = EpisodeTrace::new(world.config(), world.episode(), policy.name(), mode.name());
    let mut pointer = 0usize;
    let mut obs = world.observe();
    while !world.is_over() {
        let node = sketch.get(pointer);
        let goal = node.and_then(|n| world.goal_for_node(n));
        let input = PolicyInput {
            observation: &obs,
            goal,
            world: policy.needs_world().then_some(&*world),
            legal,
        };
        let action = policy.act(&input)?;
        let result = world.step(action)?;
        let bonus = match mode {
            RewardMode::Bonus => result
                .events
                .iter()
                .filter(|e| e.kind != EventKind::ExitReached)
                .count() as f64,
            _ => 0.0,
        };
        policy.update(&Transition {
            state: &obs,
            goal,
            action,
            next: &result.observation,
            reward: result.reward + bonus,
        });
        trace.record(
            StepRecord {
                action,
                extrinsic: result.reward,
                intrinsic: bonus,
                goal: node.cloned(),
            },
            &result.events,
        );
        if goal.is_some_and(|g| result.events.iter().any(|e| e.goal() == g)) {
            pointer += 1;
        }
        obs = result.observation;
    }
    Ok(trace)
}
