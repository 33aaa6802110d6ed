//! Scripted policies, the fixed depth-first meta-controller, the
//! hierarchical meta/controller loop and the flat reward-wiring variants.
//!
//! Policies implement [`Policy`]; meta-controllers implement
//! [`MetaController`]. Both expose update hooks so an external learner can
//! be bound without changing the loops. Scripted implementations ignore
//! them.

mod dfs;
mod flat;
mod hippo;
mod policies;
mod rollout;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Action, EnvError, GridWorld, Observation, PlanError};
use crate::graph::{Goal, GoalEncoding};
use crate::metrics::GoalEvent;

pub use dfs::{check_goal_order, dfs_goal_sequence, DfsMeta};
pub use flat::run_flat_episode;
pub use hippo::{run_hippo_episode, DefaultCritic, HippoLedger, HippoOptions, Segment};
pub use policies::{OracleController, RandomPolicy};
pub use rollout::{rollout, AgentKind, RolloutSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("policy needs the full world state")]
    NeedsWorld,
    #[error("invalid goal sequence: {0}")]
    InvalidSketch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// What a policy sees on each step.
#[derive(Debug, Clone, Copy)]
pub struct PolicyInput<'a> {
    pub observation: &'a Observation,
    pub goal: Option<Goal>,
    /// Full state, handed only to policies that ask for it.
    pub world: Option<&'a GridWorld>,
    pub legal: &'a [Action],
}

impl PolicyInput<'_> {
    /// Observation followed by the goal's one-hot encoding (zeros when no
    /// goal is active).
    pub fn features(&self) -> Vec<u8> {
        let mut out = self.observation.flatten();
        let bits = self
            .goal
            .map(Goal::encode)
            .map_or([0; GoalEncoding::LEN], |e| e.bits);
        out.extend_from_slice(&bits);
        out
    }
}

/// One controller transition passed to the update hook.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub state: &'a Observation,
    pub goal: Option<Goal>,
    pub action: Action,
    pub next: &'a Observation,
    pub reward: f64,
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Whether `act` needs [`PolicyInput::world`].
    fn needs_world(&self) -> bool {
        false
    }

    /// Called before each episode with that episode's index.
    fn reset(&mut self, _episode: u64) {}

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action, AgentError>;

    fn update(&mut self, _transition: &Transition<'_>) {}
}

/// One meta-level transition: the state when the goal was chosen, the goal,
/// the state when it ended, and the environment reward collected meanwhile.
#[derive(Debug, Clone, Copy)]
pub struct MetaTransition<'a> {
    pub start: &'a Observation,
    pub goal: Goal,
    pub end: &'a Observation,
    pub reward: f64,
}

pub trait MetaController: Send {
    fn name(&self) -> &str;

    fn reset(&mut self, _episode: u64) {}

    /// The next goal to pursue, or `None` when the meta has nothing left.
    fn next_goal(&mut self, observation: &Observation, world: &GridWorld) -> Option<Goal>;

    fn update(&mut self, _transition: &MetaTransition<'_>) {}
}

/// Intrinsic reward for the controller.
pub trait Critic: Send + Sync {
    fn reward(&self, after: &GridWorld, goal: Goal, events: &[GoalEvent]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    /// Environment reward only.
    Sparse,
    /// +1 per intermediate goal event on top of the environment reward.
    Bonus,
    /// The current goal of a fixed goal sequence is appended to the
    /// observation; no extra reward.
    Sketch,
}

impl RewardMode {
    pub const ALL: [RewardMode; 3] = [RewardMode::Sparse, RewardMode::Bonus, RewardMode::Sketch];

    pub fn name(self) -> &'static str {
        match self {
            RewardMode::Sparse => "sparse",
            RewardMode::Bonus => "bonus",
            RewardMode::Sketch => "sketch",
        }
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardMode {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, AgentError> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| AgentError::InvalidArgument(format!("unknown mode {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvConfig, VIEW_SIZE};
    use crate::graph::{Color, Template};

    #[test]
    fn features_append_goal_bits() {
        let w = GridWorld::generate(EnvConfig::for_template(Template::A, 0)).unwrap();
        let obs = w.observe();
        let input = PolicyInput {
            observation: &obs,
            goal: Some(Goal::Door(Color::Green)),
            world: None,
            legal: Action::available(false),
        };
        let f = input.features();
        assert_eq!(f.len(), VIEW_SIZE * VIEW_SIZE * 3 + 9);
        assert_eq!(&f[f.len() - 9..], &Goal::Door(Color::Green).encode().bits);
        let none = PolicyInput {
            goal: None,
            ..input
        };
        assert!(none.features()[147..].iter().all(|&b| b == 0));
    }

    #[test]
    fn modes_parse() {
        for m in RewardMode::ALL {
            assert_eq!(m.name().parse::<RewardMode>().unwrap(), m);
        }
        assert!("dense".parse::<RewardMode>().is_err());
    }
}
