//! Success rate, episode length and per-goal achievement times.
//!
//! All sums are integers, so the result does not depend on trace order or
//! on how shards are merged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EpisodeTrace, MetricsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalStat {
    /// Mean first-achievement step over the traces that achieved the goal.
    pub mean_timestep: f64,
    pub achieved: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub template: String,
    pub episodes: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub avg_episode_length_pct: f64,
    /// Keyed by dependency-graph node id.
    pub per_goal: BTreeMap<String, GoalStat>,
}

/// Streaming reducer; shards can be merged in any order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryAccumulator {
    template: Option<String>,
    max_steps: Option<u32>,
    episodes: u64,
    successes: u64,
    length_sum: u64,
    goals: BTreeMap<String, (u64, u64)>,
}

impl SummaryAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    fn check_same(&mut self, template: &str, max_steps: u32) -> Result<(), MetricsError> {
        match &self.template {
            Some(t) if t != template => {
                return Err(MetricsError::InvalidArgument(format!(
                    "traces from different templates: {t} and {template}"
                )))
            }
            _ => self.template = Some(template.to_string()),
        }
        match self.max_steps {
            Some(m) if m != max_steps => Err(MetricsError::InvalidArgument(format!(
                "traces with different max_steps: {m} and {max_steps}"
            ))),
            _ => {
                self.max_steps = Some(max_steps);
                Ok(())
            }
        }
    }

    pub fn push(&mut self, trace: &EpisodeTrace) -> Result<(), MetricsError> {
        self.check_same(&trace.template, trace.max_steps)?;
        self.episodes += 1;
        self.successes += trace.success as u64;
        self.length_sum += trace.length as u64;
        for (node, t) in trace.first_achievements() {
            let e = self.goals.entry(node.to_string()).or_default();
            e.0 += t as u64;
            e.1 += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &SummaryAccumulator) -> Result<(), MetricsError> {
        if other.episodes == 0 {
            return Ok(());
        }
        let (t, m) = (
            other.template.clone().unwrap_or_default(),
            other.max_steps.unwrap_or(1),
        );
        self.check_same(&t, m)?;
        self.episodes += other.episodes;
        self.successes += other.successes;
        self.length_sum += other.length_sum;
        for (node, (sum, n)) in &other.goals {
            let e = self.goals.entry(node.clone()).or_default();
            e.0 += sum;
            e.1 += n;
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<MetricsSummary, MetricsError> {
        if self.episodes == 0 {
            return Err(MetricsError::InvalidArgument("no traces".into()));
        }
        let n = self.episodes as f64;
        let max_steps = self.max_steps.unwrap_or(1) as f64;
        Ok(MetricsSummary {
            template: self.template.clone().unwrap_or_default(),
            episodes: self.episodes,
            successes: self.successes,
            success_rate: self.successes as f64 / n,
            avg_episode_length_pct: self.length_sum as f64 / n / max_steps * 100.0,
            per_goal: self
                .goals
                .iter()
                .map(|(node, &(sum, count))| {
                    let stat = GoalStat {
                        mean_timestep: sum as f64 / count as f64,
                        achieved: count,
                    };
                    (node.clone(), stat)
                })
                .collect(),
        })
    }
}

pub fn summarize(traces: &[EpisodeTrace]) -> Result<MetricsSummary, MetricsError> {
    let mut acc = SummaryAccumulator::new();
    for t in traces {
        acc.push(t)?;
    }
    acc.finish()
}
