use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::net::TraceSink;
use crate::agents::{dfs_goal_sequence, RewardMode};
use crate::env::{Action, EnvConfig, EnvError, GridWorld, Observation};
use crate::graph::{parse_spec, Goal, Template};
use crate::metrics::{EpisodeTrace, EventKind, GoalEvent, StepRecord};
use crate::rng::{mix, Rng, Stream};

pub const PROTOCOL_VERSION: u32 = 1;

/// Config used by `reset` for fields the request leaves out.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionDefaults {
    pub template: Template,
    pub seed: u64,
    pub mode: RewardMode,
    pub drop_enabled: bool,
    pub max_steps: u32,
    pub room_size: u32,
}

impl Default for SessionDefaults {
    fn default() -> Self {
        Self {
            template: Template::A,
            seed: 0,
            mode: RewardMode::Sparse,
            drop_enabled: false,
            max_steps: EnvConfig::DEFAULT_MAX_STEPS,
            room_size: EnvConfig::DEFAULT_ROOM_SIZE,
        }
    }
}

#[derive(Serialize, Default)]
struct Response {
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    actions: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    episode: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obs: Option<Observation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reward: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    done: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    events: Option<Vec<GoalEvent>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    goal: Option<Value>,
}

impl Response {
    fn ok() -> Self {
        Response {
            ok: true,
            ..Default::default()
        }
    }

    fn error(code: &'static str) -> Self {
        Response {
            error: Some(code),
            ..Default::default()
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Response {
            message: Some(message.into()),
            ..Response::error("bad-request")
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResetArgs {
    #[allow(dead_code)]
    cmd: String,
    template: Option<String>,
    seed: Option<u64>,
    episode: Option<u64>,
    mode: Option<RewardMode>,
    drop: Option<bool>,
    max_steps: Option<u32>,
    room_size: Option<u32>,
    graph: Option<Value>,
}

/// One client's environment and protocol state. Requests are handled
/// strictly in order.
pub struct Session {
    defaults: SessionDefaults,
    sink: Option<Arc<TraceSink>>,
    world: Option<GridWorld>,
    mode: RewardMode,
    sketch: Vec<String>,
    pointer: usize,
    trace: Option<EpisodeTrace>,
    closed: bool,
}

impl Session {
    pub fn new(defaults: SessionDefaults, sink: Option<Arc<TraceSink>>) -> Self {
        Self {
            mode: defaults.mode,
            defaults,
            sink,
            world: None,
            sketch: Vec::new(),
            pointer: 0,
            trace: None,
            closed: false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn world(&self) -> Option<&GridWorld> {
        self.world.as_ref()
    }

    /// Handles one request line and returns one response line (without the
    /// trailing newline).
    pub fn handle(&mut self, line: &str) -> String {
        let response = self.dispatch(line);
        serde_json::to_string(&response).expect("response serializes")
    }

    fn dispatch(&mut self, line: &str) -> Response {
        let Ok(Value::Object(request)) = serde_json::from_str::<Value>(line) else {
            return Response::error("parse");
        };
        let Some(Value::String(cmd)) = request.get("cmd") else {
            return Response::error("parse");
        };
        match cmd.as_str() {
            "hello" => {
                let drop = self
                    .world
                    .as_ref()
                    .map_or(self.defaults.drop_enabled, |w| w.config().drop_enabled);
                Response {
                    protocol: Some(PROTOCOL_VERSION),
                    actions: Some(Action::available(drop).iter().map(|a| a.code()).collect()),
                    ..Response::ok()
                }
            }
            "reset" => match serde_json::from_value::<ResetArgs>(Value::Object(request)) {
                Ok(args) => self.reset(args),
                Err(e) => Response::bad_request(e.to_string()),
            },
            "step" => self.step(request.get("action")),
            "observe" => match &self.world {
                Some(w) => Response {
                    obs: Some(w.observe()),
                    ..Response::ok()
                },
                None => Response::error("no-episode"),
            },
            "close" => {
                self.flush_trace();
                self.closed = true;
                Response::ok()
            }
            _ => Response::error("unknown-cmd"),
        }
    }

    fn config_for(&self, args: &ResetArgs) -> Result<EnvConfig, String> {
        let previous = self.world.as_ref().map(|w| w.config());
        let mut config = match (&args.graph, &args.template) {
            (Some(_), Some(_)) => return Err("give either template or graph, not both".into()),
            (Some(graph), None) => {
                let g = parse_spec(&graph.to_string()).map_err(|e| e.to_string())?;
                EnvConfig::new(g, 0)
            }
            (None, Some(t)) => {
                let t: Template = t
                    .parse()
                    .map_err(|e: crate::graph::GraphError| e.to_string())?;
                EnvConfig::for_template(t, 0)
            }
            (None, None) => match previous {
                Some(p) => p.clone(),
                None => EnvConfig::for_template(self.defaults.template, 0),
            },
        };
        let fallback = |pick: fn(&EnvConfig) -> u64, default: u64| previous.map_or(default, pick);
        config.seed = args
            .seed
            .unwrap_or_else(|| fallback(|c| c.seed, self.defaults.seed));
        config.max_steps = args.max_steps.unwrap_or_else(|| {
            fallback(|c| c.max_steps as u64, self.defaults.max_steps as u64) as u32
        });
        config.room_size = args.room_size.unwrap_or_else(|| {
            fallback(|c| c.room_size as u64, self.defaults.room_size as u64) as u32
        });
        config.drop_enabled = args
            .drop
            .unwrap_or_else(|| previous.map_or(self.defaults.drop_enabled, |c| c.drop_enabled));
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    fn reset(&mut self, args: ResetArgs) -> Response {
        let config = match self.config_for(&args) {
            Ok(c) => c,
            Err(m) => return Response::bad_request(m),
        };
        let episode = args.episode.unwrap_or_else(|| match &self.world {
            Some(w) if *w.config() == config => w.episode() + 1,
            _ => 0,
        });
        let world = match GridWorld::generate_episode(config, episode) {
            Ok(w) => w,
            Err(e) => return Response::bad_request(e.to_string()),
        };
        self.flush_trace();
        let mode = args.mode.unwrap_or(self.mode);
        self.mode = mode;
        self.sketch = if mode == RewardMode::Sketch {
            let mut rng = Rng::new(mix(world.config().seed, episode), Stream::Meta);
            dfs_goal_sequence(&world.config().graph, &mut rng)
        } else {
            Vec::new()
        };
        self.pointer = 0;
        self.trace = Some(EpisodeTrace::new(
            world.config(),
            episode,
            "remote",
            mode.name(),
        ));
        let response = Response {
            episode: Some(episode),
            obs: Some(world.observe()),
            goal: self.goal_field(&world),
            ..Response::ok()
        };
        self.world = Some(world);
        response
    }

    fn sketch_goal(&self, world: &GridWorld) -> Option<Goal> {
        self.sketch
            .get(self.pointer)
            .and_then(|n| world.goal_for_node(n))
    }

    fn goal_field(&self, world: &GridWorld) -> Option<Value> {
        (self.mode == RewardMode::Sketch).then(|| {
            self.sketch_goal(world)
                .map_or(Value::Null, |g| serde_json::json!(g.encode().bits))
        })
    }

    fn step(&mut self, action: Option<&Value>) -> Response {
        let Some(world) = self.world.as_mut() else {
            return Response::error("no-episode");
        };
        if world.is_over() {
            return Response::error("episode-over");
        }
        let Some(action) = action
            .and_then(Value::as_u64)
            .and_then(|c| u8::try_from(c).ok())
            .and_then(Action::from_code)
        else {
            return Response::error("bad-action");
        };
        let result = match world.step(action) {
            Ok(r) => r,
            Err(EnvError::InvalidAction(_)) => return Response::error("bad-action"),
            Err(EnvError::EpisodeOver) => return Response::error("episode-over"),
            Err(e) => return Response::bad_request(e.to_string()),
        };
        let bonus = match self.mode {
            RewardMode::Bonus => result
                .events
                .iter()
                .filter(|e| e.kind != EventKind::ExitReached)
                .count() as f64,
            _ => 0.0,
        };
        let world = self.world.as_ref().expect("episode exists");
        let active = self.sketch_goal(world);
        let node = self.sketch.get(self.pointer).cloned();
        if active.is_some_and(|g| result.events.iter().any(|e| e.goal() == g)) {
            self.pointer += 1;
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.record(
                StepRecord {
                    action,
                    extrinsic: result.reward,
                    intrinsic: bonus,
                    goal: node,
                },
                &result.events,
            );
        }
        let goal = self.goal_field(world);
        if result.done || result.truncated {
            self.flush_trace();
        }
        Response {
            obs: Some(result.observation),
            reward: Some(result.reward + bonus),
            done: Some(result.done),
            truncated: Some(result.truncated),
            events: Some(result.events),
            goal,
            ..Response::ok()
        }
    }

    fn flush_trace(&mut self) {
        if let Some(trace) = self.trace.take() {
            if let (Some(sink), false) = (&self.sink, trace.steps.is_empty()) {
                // A failing sink must not take the session down.
                let _ = sink.append(&trace);
            }
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.flush_trace();
    }
}
