use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{
    dfs_goal_sequence, run_flat_episode, run_hippo_episode, AgentError, DefaultCritic, DfsMeta,
    HippoOptions, OracleController, RandomPolicy, RewardMode,
};
use crate::env::{EnvConfig, GridWorld};
use crate::metrics::EpisodeTrace;
use crate::rng::{mix, Rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Random,
    Oracle,
    /// Depth-first meta-controller over the oracle controller.
    HippoOracle,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Random, AgentKind::Oracle, AgentKind::HippoOracle];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Oracle => "oracle",
            AgentKind::HippoOracle => "hippo-oracle",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, AgentError> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| AgentError::InvalidArgument(format!("unknown agent {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutSpec {
    /// World config; its seed also seeds the policies and the meta.
    pub config: EnvConfig,
    pub agent: AgentKind,
    pub mode: RewardMode,
    pub episodes: u64,
}

impl RolloutSpec {
    pub fn validate(&self) -> Result<(), AgentError> {
        self.config.validate()?;
        if self.episodes == 0 {
            return Err(AgentError::InvalidArgument("episodes must be >= 1".into()));
        }
        if self.agent == AgentKind::HippoOracle && self.mode != RewardMode::Sparse {
            return Err(AgentError::InvalidArgument(format!(
                "{} pays its own intrinsic rewards; mode {} does not apply",
                self.agent, self.mode
            )));
        }
        Ok(())
    }
}

fn run_one(spec: &RolloutSpec, episode: u64) -> Result<EpisodeTrace, AgentError> {
    let config = &spec.config;
    let mut world = GridWorld::generate_episode(config.clone(), episode)?;
    match spec.agent {
        AgentKind::HippoOracle => {
            let mut meta = DfsMeta::new(config.graph.clone(), config.seed);
            let options = HippoOptions {
                agent: spec.agent.name().into(),
                ..HippoOptions::default()
            };
            let mut controller = OracleController::new();
            let (trace, _) = run_hippo_episode(
                &mut world,
                &mut meta,
                &mut controller,
                &DefaultCritic,
                &options,
            )?;
            Ok(trace)
        }
        AgentKind::Random | AgentKind::Oracle => {
            let sketch = (spec.mode == RewardMode::Sketch).then(|| {
                let mut rng = Rng::new(mix(config.seed, episode), Stream::Meta);
                dfs_goal_sequence(&config.graph, &mut rng)
            });
            let mut random;
            let mut oracle;
            let policy: &mut dyn super::Policy = if spec.agent == AgentKind::Random {
                random = RandomPolicy::new(config.seed);
                &mut random
            } else {
                oracle = OracleController::new();
                &mut oracle
            };
            run_flat_episode(&mut world, policy, spec.mode, sketch.as_deref())
        }
    }
}

/// Runs episodes `0..episodes` in parallel; traces come back in episode
/// order and do not depend on the number of worker threads.
pub fn rollout(spec: &RolloutSpec) -> Result<Vec<EpisodeTrace>, AgentError> {
    spec.validate()?;
    (0..spec.episodes)
        .into_par_iter()
        .map(|ep| run_one(spec, ep))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Template;
    use crate::metrics::summarize;

    fn spec(t: Template, agent: AgentKind, mode: RewardMode, episodes: u64) -> RolloutSpec {
        RolloutSpec {
            config: EnvConfig::for_template(t, 17),
            agent,
            mode,
            episodes,
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let s = spec(Template::B, AgentKind::Random, RewardMode::Bonus, 12);
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| rollout(&s).unwrap());
        let parallel = rollout(&s).unwrap();
        assert_eq!(serial, parallel);
        assert!(serial
            .iter()
            .enumerate()
            .all(|(i, t)| t.episode == i as u64));
    }

    #[test]
    fn hippo_oracle_always_succeeds() {
        let traces = rollout(&spec(
            Template::G,
            AgentKind::HippoOracle,
            RewardMode::Sparse,
            20,
        ))
        .unwrap();
        assert_eq!(summarize(&traces).unwrap().success_rate, 1.0);
    }

    #[test]
    fn oracle_goal_means_follow_dependencies() {
        let traces = rollout(&spec(
            Template::A,
            AgentKind::Oracle,
            RewardMode::Sparse,
            30,
        ))
        .unwrap();
        let s = summarize(&traces).unwrap();
        let m = |n: &str| s.per_goal[n].mean_timestep;
        assert!(m("key_red") < m("room_red"));
        assert!(m("room_red") < m("exit"));
    }

    #[test]
    fn invalid_combinations_rejected() {
        assert!(rollout(&spec(
            Template::A,
            AgentKind::HippoOracle,
            RewardMode::Bonus,
            1
        ))
        .is_err());
        assert!(rollout(&spec(Template::A, AgentKind::Random, RewardMode::Sparse, 0)).is_err());
    }

    #[test]
    fn sketch_rollout_runs() {
        let traces = rollout(&spec(Template::F, AgentKind::Oracle, RewardMode::Sketch, 5)).unwrap();
        assert!(traces.iter().all(|t| t.success && t.mode == "sketch"));
    }
}
