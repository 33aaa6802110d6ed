//! The two-level meta-controller / controller loop.
//!
//! The meta picks a goal; the controller acts on the observation plus the
//! goal's encoding until an event achieves the goal or the episode ends.
//! Every step the controller's update hook receives the critic's intrinsic
//! reward. Environment reward is summed into `F` and handed to the meta's
//! update hook when the goal ends. The episode is over at the exit or at
//! truncation.
//!
//! A controller that makes no event progress for `4 * width * height` steps
//! (or reports that it cannot reach the goal) gives the goal up; the failure
//! is recorded in the trace and the meta is asked again. After
//! [`HippoOptions::max_failures`] consecutive failures the episode is
//! abandoned.

use serde::{Deserialize, Serialize};

use super::{AgentError, Critic, MetaController, MetaTransition, Policy, PolicyInput, Transition};
use crate::env::{Action, GridWorld};
use crate::graph::Goal;
use crate::metrics::{EpisodeTrace, GoalEvent, GoalFailure, StepRecord};

/// Pays 1 when an event for the active goal happened on this step.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultCritic;

impl Critic for DefaultCritic {
    fn reward(&self, _after: &GridWorld, goal: Goal, events: &[GoalEvent]) -> f64 {
        if events.iter().any(|e| e.goal() == goal) {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HippoOptions {
    pub agent: String,
    /// Steps without any goal event before the active goal is given up.
    /// `None` means `4 * width * height`.
    pub stall_limit: Option<u32>,
    pub max_failures: u32,
}

impl Default for HippoOptions {
    fn default() -> Self {
        Self {
            agent: "hippo".into(),
            stall_limit: None,
            max_failures: 8,
        }
    }
}

/// Steps `[start, end)` spent on one goal and the environment reward `F`
/// collected meanwhile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub goal: String,
    pub start: u32,
    pub end: u32,
    pub extrinsic: f64,
    pub achieved: bool,
}

/// What each update hook received, for checking reward routing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HippoLedger {
    pub segments: Vec<Segment>,
    /// One entry per environment step: the controller's reward.
    pub controller_rewards: Vec<f64>,
    /// One entry per segment: the meta's reward.
    pub meta_rewards: Vec<f64>,
}

impl HippoLedger {
    pub fn total_extrinsic(&self) -> f64 {
        self.meta_rewards.iter().sum()
    }
}

/// Runs one episode on a freshly reset `world`.
pub fn run_hippo_episode(
    world: &mut GridWorld,
    meta: &mut dyn MetaController,
    controller: &mut dyn Policy,
    critic: &dyn Critic,
    options: &HippoOptions,
) -> Result<(EpisodeTrace, HippoLedger), AgentError> {
    if world.steps() != 0 || world.is_over() {
        return Err(AgentError::InvalidArgument(
            "episode already started".into(),
        ));
    }
    let episode = world.episode();
    meta.reset(episode);
    controller.reset(episode);
    let stall_limit = options
        .stall_limit
        .unwrap_or((4 * world.width() * world.height()) as u32);
    let legal = Action::available(world.config().drop_enabled);
    let mut trace = EpisodeTrace::new(world.config(), episode, &options.agent, "sparse");
    let mut ledger = HippoLedger::default();
    let mut obs = world.observe();
    let mut failures = 0u32;
    let mut idle_requests = 0u32;

    while !world.is_over() {
        let Some(goal) = meta.next_goal(&obs, world) else {
            trace.failures.push(GoalFailure {
                goal: "-".into(),
                timestep: world.steps(),
                reason: "meta-controller has no further goals".into(),
            });
            break;
        };
        let label = world
            .node_for_goal(goal)
            .unwrap_or_else(|| goal.to_string());
        if world.is_goal_satisfied(goal) {
            idle_requests += 1;
            if idle_requests > 64 {
                break;
            }
            continue;
        }
        idle_requests = 0;

        let start_obs = obs;
        let start = world.steps();
        let mut f_total = 0.0;
        let mut achieved = false;
        let mut quiet = 0u32;
        let mut failure = None;
        while !world.is_over() {
            let input = PolicyInput {
                observation: &obs,
                goal: Some(goal),
                world: controller.needs_world().then_some(&*world),
                legal,
            };
            let action = match controller.act(&input) {
                Ok(a) => a,
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            };
            let result = world.step(action)?;
            let intrinsic = critic.reward(world, goal, &result.events);
            controller.update(&Transition {
                state: &obs,
                goal: Some(goal),
                action,
                next: &result.observation,
                reward: intrinsic,
            });
            ledger.controller_rewards.push(intrinsic);
            f_total += result.reward;
            trace.record(
                StepRecord {
                    action,
                    extrinsic: result.reward,
                    intrinsic,
                    goal: Some(label.clone()),
                },
                &result.events,
            );
            obs = result.observation;
            if result.events.iter().any(|e| e.goal() == goal) {
                achieved = true;
                break;
            }
            quiet = if result.events.is_empty() {
                quiet + 1
            } else {
                0
            };
            if quiet >= stall_limit {
                failure = Some(format!("no progress for {stall_limit} steps"));
                break;
            }
        }

        meta.update(&MetaTransition {
            start: &start_obs,
            goal,
            end: &obs,
            reward: f_total,
        });
        ledger.meta_rewards.push(f_total);
        ledger.segments.push(Segment {
            goal: label.clone(),
            start,
            end: world.steps(),
            extrinsic: f_total,
            achieved,
        });
        if let Some(reason) = failure {
            trace.failures.push(GoalFailure {
                goal: label,
                timestep: world.steps(),
                reason,
            });
            failures += 1;
            if failures >= options.max_failures {
                break;
            }
        } else if achieved {
            failures = 0;
        }
    }
    Ok((trace, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{DfsMeta, OracleController, RandomPolicy};
    use crate::env::{plan, EnvConfig, Observation};
    use crate::graph::{Template, TEMPLATES};
    use crate::metrics::EventKind;

    fn hippo(t: Template, seed: u64, episode: u64) -> (GridWorld, EpisodeTrace, HippoLedger) {
        let mut w = GridWorld::generate_episode(EnvConfig::for_template(t, seed), episode).unwrap();
        let mut meta = DfsMeta::new(t.graph(), seed);
        let mut ctl = OracleController::new();
        let (trace, ledger) = run_hippo_episode(
            &mut w,
            &mut meta,
            &mut ctl,
            &DefaultCritic,
            &HippoOptions::default(),
        )
        .unwrap();
        (w, trace, ledger)
    }

    fn check_routing(trace: &EpisodeTrace, ledger: &HippoLedger) {
        assert_eq!(ledger.controller_rewards.len(), trace.steps.len());
        for (i, (r, s)) in ledger
            .controller_rewards
            .iter()
            .zip(&trace.steps)
            .enumerate()
        {
            assert_eq!(*r, s.intrinsic);
            let step = i as u32 + 1;
            let matched = trace
                .events
                .iter()
                .any(|e| e.timestep == step && trace.steps[i].goal.as_deref() == e.node.as_deref());
            assert_eq!(*r == 1.0, matched, "step {step}");
        }
        // Segments tile the episode.
        let mut at = 0;
        for (seg, f) in ledger.segments.iter().zip(&ledger.meta_rewards) {
            assert_eq!(seg.start, at);
            assert!(seg.end >= seg.start);
            let sum: f64 = trace.steps[seg.start as usize..seg.end as usize]
                .iter()
                .map(|s| s.extrinsic)
                .sum();
            assert_eq!(sum, *f);
            assert_eq!(seg.extrinsic, *f);
            at = seg.end;
        }
        assert_eq!(at, trace.length);
    }

    #[test]
    fn oracle_hippo_solves_all_templates() {
        for t in TEMPLATES {
            for ep in 0..10 {
                let (_, trace, ledger) = hippo(t, 11, ep);
                assert!(trace.success, "{t} episode {ep}: {:?}", trace.failures);
                assert!(trace.failures.is_empty());
                assert_eq!(ledger.total_extrinsic(), 1.0);
                check_routing(&trace, &ledger);
                trace.validate().unwrap();
            }
        }
    }

    #[test]
    fn random_controller_truncates_with_zero_f() {
        let mut w =
            GridWorld::generate(EnvConfig::for_template(Template::G, 1).with_max_steps(200))
                .unwrap();
        let mut meta = DfsMeta::new(Template::G.graph(), 1);
        let mut ctl = RandomPolicy::new(1);
        let (trace, ledger) = run_hippo_episode(
            &mut w,
            &mut meta,
            &mut ctl,
            &DefaultCritic,
            &HippoOptions::default(),
        )
        .unwrap();
        assert!(!trace.success);
        assert!(w.truncated());
        assert_eq!(trace.length, 200);
        assert_eq!(ledger.total_extrinsic(), 0.0);
        check_routing(&trace, &ledger);
    }

    /// Replays a fixed action list as the controller.
    struct Scripted(Vec<Action>, usize);

    impl Policy for Scripted {
        fn name(&self) -> &str {
            "scripted"
        }
        fn act(&mut self, _input: &PolicyInput<'_>) -> Result<Action, AgentError> {
            self.1 += 1;
            self.0
                .get(self.1 - 1)
                .copied()
                .ok_or_else(|| AgentError::InvalidArgument("script exhausted".into()))
        }
    }

    #[derive(Default)]
    struct RecordingMeta {
        inner: Option<DfsMeta>,
        rewards: Vec<f64>,
    }

    impl MetaController for RecordingMeta {
        fn name(&self) -> &str {
            "recording"
        }
        fn reset(&mut self, episode: u64) {
            self.inner.as_mut().unwrap().reset(episode);
        }
        fn next_goal(&mut self, obs: &Observation, world: &GridWorld) -> Option<Goal> {
            self.inner.as_mut().unwrap().next_goal(obs, world)
        }
        fn update(&mut self, t: &MetaTransition<'_>) {
            self.rewards.push(t.reward);
        }
    }

    #[test]
    fn scripted_episode_routes_rewards() {
        let mut w = GridWorld::generate(EnvConfig::for_template(Template::A, 0)).unwrap();
        let mut script = Vec::new();
        let mut sim = w.clone();
        let red = w.colors()[&crate::graph::Color::Red];
        for g in [Goal::Key(red), Goal::Door(red), Goal::Exit] {
            for a in plan(&sim, g).unwrap() {
                sim.step(a).unwrap();
                script.push(a);
            }
        }
        let mut meta = RecordingMeta {
            inner: Some(DfsMeta::new(Template::A.graph(), 0)),
            ..Default::default()
        };
        let mut ctl = Scripted(script.clone(), 0);
        let (trace, ledger) = run_hippo_episode(
            &mut w,
            &mut meta,
            &mut ctl,
            &DefaultCritic,
            &HippoOptions::default(),
        )
        .unwrap();
        assert!(trace.success);
        assert_eq!(trace.length as usize, script.len());
        let event_steps: Vec<(EventKind, u32)> =
            trace.events.iter().map(|e| (e.kind, e.timestep)).collect();
        let rewarded: Vec<u32> = ledger
            .controller_rewards
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == 1.0)
            .map(|(i, _)| i as u32 + 1)
            .collect();
        assert_eq!(
            rewarded,
            event_steps.iter().map(|e| e.1).collect::<Vec<_>>()
        );
        assert_eq!(meta.rewards, vec![0.0, 0.0, 1.0]);
        check_routing(&trace, &ledger);
    }

    #[test]
    fn stalled_goal_is_abandoned() {
        let mut w = GridWorld::generate(EnvConfig::for_template(Template::A, 0)).unwrap();
        let mut meta = DfsMeta::new(Template::A.graph(), 0);
        let mut ctl = Scripted(vec![Action::TurnLeft; 1000], 0);
        let opts = HippoOptions {
            stall_limit: Some(10),
            ..Default::default()
        };
        let (trace, ledger) =
            run_hippo_episode(&mut w, &mut meta, &mut ctl, &DefaultCritic, &opts).unwrap();
        assert!(!trace.success);
        assert_eq!(trace.length, 30);
        assert_eq!(ledger.segments.len(), 3);
        assert!(ledger.segments.iter().all(|s| !s.achieved));
        assert_eq!(trace.failures.len(), 4);
        assert!(trace.failures[3].reason.contains("no further goals"));
        check_routing(&trace, &ledger);
    }

    #[test]
    fn refuses_started_episode() {
        let mut w = GridWorld::generate(EnvConfig::for_template(Template::A, 0)).unwrap();
        w.step(Action::TurnLeft).unwrap();
        let mut meta = DfsMeta::new(Template::A.graph(), 0);
        let mut ctl = OracleController::new();
        assert!(run_hippo_episode(
            &mut w,
            &mut meta,
            &mut ctl,
            &DefaultCritic,
            &HippoOptions::default()
        )
        .is_err());
    }
}
