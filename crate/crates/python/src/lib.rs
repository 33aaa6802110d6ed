//! Python bindings: `Graph`, `Env`, and helpers for hitting times,
//! rollouts and correlation.

use escaperoom_core::agents::{rollout as run_rollout, AgentKind, RewardMode, RolloutSpec};
use escaperoom_core::env::{plan as plan_goal, Action, EnvConfig, GridWorld, Observation};
use escaperoom_core::graph::{parse_spec, serialize_spec, DependencyGraph, Template, TEMPLATES};
use escaperoom_core::metrics::{pearson as pearson_r, summarize};
use escaperoom_core::walk::{augment, hitting_time_absorbing, hitting_time_mc, WalkParams};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Hands a serializable value to Python as plain dicts and lists.
fn to_python<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn template(letter: &str) -> PyResult<Template> {
    letter.parse().map_err(value_err)
}

fn params(advance: f64, restart: f64) -> PyResult<WalkParams> {
    WalkParams::with_advance(advance, restart).map_err(value_err)
}

fn obs_lists(obs: &Observation) -> Vec<Vec<Vec<u32>>> {
    obs.cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| c.iter().map(|&v| v as u32).collect())
                .collect()
        })
        .collect()
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: DependencyGraph,
}

#[pymethods]
impl PyGraph {
    /// One of the shipped templates, `"a"` to `"g"`.
    #[staticmethod]
    fn template(letter: &str) -> PyResult<Self> {
        Ok(Self {
            inner: template(letter)?.graph(),
        })
    }

    #[staticmethod]
    fn from_spec(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_spec(text).map_err(value_err)?,
        })
    }

    fn to_spec(&self) -> String {
        serialize_spec(&self.inner)
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().iter().map(|n| n.id.clone()).collect()
    }

    #[getter]
    fn edges(&self) -> Vec<(String, String)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn exit_depth(&self) -> usize {
        self.inner.exit_depth()
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    /// Number of states in the augmented random-walk graph.
    #[pyo3(signature = (drop_key = false))]
    fn walk_states(&self, drop_key: bool) -> usize {
        augment(&self.inner, drop_key).n()
    }

    #[pyo3(signature = (drop_key = false, advance = 0.19, restart = 0.01))]
    fn hitting_time(&self, drop_key: bool, advance: f64, restart: f64) -> PyResult<f64> {
        let aug = augment(&self.inner, drop_key);
        Ok(hitting_time_absorbing(&aug, &params(advance, restart)?)
            .map_err(runtime_err)?
            .value)
    }

    /// Monte-Carlo estimate; returns `(mean, stderr)`.
    #[pyo3(signature = (walks = 200_000, seed = 0, drop_key = false, advance = 0.19, restart = 0.01))]
    fn hitting_time_mc(
        &self,
        py: Python<'_>,
        walks: u64,
        seed: u64,
        drop_key: bool,
        advance: f64,
        restart: f64,
    ) -> PyResult<(f64, f64)> {
        let aug = augment(&self.inner, drop_key);
        let p = params(advance, restart)?;
        let r = py
            .detach(|| hitting_time_mc(&aug, &p, walks, seed))
            .map_err(runtime_err)?;
        Ok((r.value, r.stderr.unwrap_or(f64::NAN)))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, exit_depth={}, width={})",
            self.inner.nodes().len(),
            self.inner.exit_depth(),
            self.inner.width()
        )
    }
}

/// One EscapeRoom environment.
#[pyclass(name = "Env")]
struct PyEnv {
    world: GridWorld,
}

#[pymethods]
impl PyEnv {
    #[new]
    #[pyo3(signature = (template = "a", seed = 0, episode = 0, max_steps = 1000, drop = false, room_size = 6, graph = None))]
    fn new(
        template: &str,
        seed: u64,
        episode: u64,
        max_steps: u32,
        drop: bool,
        room_size: u32,
        graph: Option<&PyGraph>,
    ) -> PyResult<Self> {
        let config = match graph {
            Some(g) => EnvConfig::new(g.inner.clone(), seed),
            None => EnvConfig::for_template(self::template(template)?, seed),
        }
        .with_max_steps(max_steps)
        .with_drop(drop)
        .with_room_size(room_size);
        config.validate().map_err(value_err)?;
        Ok(Self {
            world: GridWorld::generate_episode(config, episode).map_err(runtime_err)?,
        })
    }

    #[staticmethod]
    fn from_world_file(text: &str) -> PyResult<Self> {
        Ok(Self {
            world: GridWorld::from_world_file(text).map_err(value_err)?,
        })
    }

    fn to_world_file(&self) -> String {
        self.world.to_world_file()
    }

    /// Starts the next episode, or `episode` if given; returns the view.
    #[pyo3(signature = (episode = None))]
    fn reset(&mut self, episode: Option<u64>) -> PyResult<Vec<Vec<Vec<u32>>>> {
        let next = episode.unwrap_or(self.world.episode() + 1);
        let obs = self.world.reset_to_episode(next).map_err(runtime_err)?;
        Ok(obs_lists(&obs))
    }

    /// Returns `(obs, reward, done, truncated, events)`.
    #[allow(clippy::type_complexity)]
    fn step<'py>(
        &mut self,
        py: Python<'py>,
        action: u8,
    ) -> PyResult<(Vec<Vec<Vec<u32>>>, f64, bool, bool, Bound<'py, PyAny>)> {
        let action = Action::from_code(action)
            .ok_or_else(|| PyValueError::new_err(format!("unknown action {action}")))?;
        let r = self.world.step(action).map_err(value_err)?;
        Ok((
            obs_lists(&r.observation),
            r.reward,
            r.done,
            r.truncated,
            to_python(py, &r.events)?,
        ))
    }

    fn observe(&self) -> Vec<Vec<Vec<u32>>> {
        obs_lists(&self.world.observe())
    }

    /// Shortest action sequence achieving a graph node such as `"key_red"`.
    fn plan(&self, node: &str) -> PyResult<Vec<u8>> {
        let goal = self
            .world
            .goal_for_node(node)
            .ok_or_else(|| PyValueError::new_err(format!("no goal for node {node:?}")))?;
        Ok(plan_goal(&self.world, goal)
            .map_err(runtime_err)?
            .into_iter()
            .map(Action::code)
            .collect())
    }

    #[getter]
    fn episode(&self) -> u64 {
        self.world.episode()
    }

    #[getter]
    fn steps(&self) -> u32 {
        self.world.steps()
    }

    #[getter]
    fn agent_pos(&self) -> (i32, i32) {
        let p = self.world.agent_pos();
        (p.x, p.y)
    }

    #[getter]
    fn size(&self) -> (i32, i32) {
        (self.world.width(), self.world.height())
    }

    #[getter]
    fn is_over(&self) -> bool {
        self.world.is_over()
    }

    /// Keys, doors and exits currently in the world.
    fn counts(&self) -> (usize, usize, usize, usize) {
        let c = self.world.counts();
        (
            c.keys_on_floor + c.keys_carried,
            c.doors,
            c.closed_doors,
            c.exits,
        )
    }
}

/// `(template, exit_depth, width, hitting_time)` for every shipped template.
#[pyfunction]
#[pyo3(signature = (drop_key = false, advance = 0.19, restart = 0.01))]
fn ht_table(
    drop_key: bool,
    advance: f64,
    restart: f64,
) -> PyResult<Vec<(String, usize, usize, f64)>> {
    let rows = escaperoom_core::walk::ht_table(&TEMPLATES, drop_key, &params(advance, restart)?)
        .map_err(runtime_err)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.template.to_string(),
                r.exit_depth,
                r.width,
                r.hitting_time,
            )
        })
        .collect())
}

/// Runs a scripted agent and returns the summary as a dict.
#[pyfunction]
#[pyo3(signature = (template = "a", agent = "random", mode = "sparse", episodes = 100, seed = 0, max_steps = 1000, drop = false))]
#[allow(clippy::too_many_arguments)]
fn rollout<'py>(
    py: Python<'py>,
    template: &str,
    agent: &str,
    mode: &str,
    episodes: u64,
    seed: u64,
    max_steps: u32,
    drop: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = RolloutSpec {
        config: EnvConfig::for_template(self::template(template)?, seed)
            .with_max_steps(max_steps)
            .with_drop(drop),
        agent: agent.parse::<AgentKind>().map_err(value_err)?,
        mode: mode.parse::<RewardMode>().map_err(value_err)?,
        episodes,
    };
    spec.validate().map_err(value_err)?;
    let traces = py.detach(|| run_rollout(&spec)).map_err(runtime_err)?;
    to_python(py, &summarize(&traces).map_err(runtime_err)?)
}

#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    pearson_r(&xs, &ys).map_err(value_err)
}

#[pymodule]
fn escaperoom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyEnv>()?;
    m.add_function(wrap_pyfunction!(ht_table, m)?)?;
    m.add_function(wrap_pyfunction!(rollout, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add(
        "TEMPLATES",
        TEMPLATES.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
