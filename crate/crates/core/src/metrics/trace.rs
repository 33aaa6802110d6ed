//! Episode traces, persisted one JSON object per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{EventKind, GoalEvent, MetricsError};
use crate::env::{Action, EnvConfig};

pub const TRACE_EXTENSION: &str = ".traces.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub action: Action,
    pub extrinsic: f64,
    pub intrinsic: f64,
    /// Active goal (graph node id), if any.
    pub goal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeTrace {
    pub template: String,
    pub seed: u64,
    pub episode: u64,
    pub max_steps: u32,
    pub drop_enabled: bool,
    pub agent: String,
    pub mode: String,
    pub steps: Vec<StepRecord>,
    pub events: Vec<GoalEvent>,
    pub length: u32,
    pub success: bool,
    /// Goals the controller gave up on.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<GoalFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalFailure {
    pub goal: String,
    pub timestep: u32,
    pub reason: String,
}

impl EpisodeTrace {
    pub fn new(config: &EnvConfig, episode: u64, agent: &str, mode: &str) -> Self {
        Self {
            template: config.label(),
            seed: config.seed,
            episode,
            max_steps: config.max_steps,
            drop_enabled: config.drop_enabled,
            agent: agent.to_string(),
            mode: mode.to_string(),
            steps: Vec::new(),
            events: Vec::new(),
            length: 0,
            success: false,
            failures: Vec::new(),
        }
    }

    pub fn record(&mut self, step: StepRecord, events: &[GoalEvent]) {
        self.steps.push(step);
        self.length = self.steps.len() as u32;
        self.events.extend_from_slice(events);
        self.success |= events.iter().any(|e| e.kind == EventKind::ExitReached);
    }

    pub fn total_extrinsic(&self) -> f64 {
        self.steps.iter().map(|s| s.extrinsic).sum()
    }

    pub fn total_intrinsic(&self) -> f64 {
        self.steps.iter().map(|s| s.intrinsic).sum()
    }

    /// First timestep at which each graph node was achieved.
    pub fn first_achievements(&self) -> Vec<(&str, u32)> {
        let mut out: Vec<(&str, u32)> = Vec::new();
        for e in &self.events {
            if let Some(node) = e.node.as_deref() {
                if !out.iter().any(|(n, _)| *n == node) {
                    out.push((node, e.timestep));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.length as usize != self.steps.len() {
            return Err(format!(
                "length {} but {} steps",
                self.length,
                self.steps.len()
            ));
        }
        if self.length > self.max_steps {
            return Err(format!(
                "length {} exceeds max_steps {}",
                self.length, self.max_steps
            ));
        }
        let exits = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::ExitReached)
            .count();
        if exits > 1 || self.success != (exits == 1) {
            return Err("success flag disagrees with exit events".into());
        }
        if !self
            .events
            .windows(2)
            .all(|w| w[0].timestep < w[1].timestep)
        {
            return Err("event timesteps not strictly increasing".into());
        }
        if self
            .events
            .iter()
            .any(|e| e.timestep == 0 || e.timestep > self.length)
        {
            return Err("event timestep outside the episode".into());
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// Appends one trace as a single line.
pub fn write_trace(out: &mut impl Write, trace: &EpisodeTrace) -> std::io::Result<()> {
    writeln!(out, "{}", trace.to_json_line())
}

/// Reads a trace log; blank lines are skipped.
pub fn read_traces(input: impl BufRead) -> Result<Vec<EpisodeTrace>, MetricsError> {
    let mut traces = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| MetricsError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| MetricsError::Trace {
            line: i + 1,
            message,
        };
        let trace: EpisodeTrace = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        trace.validate().map_err(err)?;
        traces.push(trace);
    }
    Ok(traces)
}
