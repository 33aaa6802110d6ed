//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always
//! printed; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use escaperoom_core::agents::{
    rollout, run_hippo_episode, AgentError, AgentKind, DefaultCritic, DfsMeta, HippoOptions,
    MetaController, MetaTransition, Policy, PolicyInput, RewardMode, RolloutSpec,
};
use escaperoom_core::env::{plan, Action, EnvConfig, GridWorld, Observation};
use escaperoom_core::graph::{Color, DependencyGraph, Goal, GoalNode, Template, TEMPLATES};
use escaperoom_core::metrics::{pearson, spearman, summarize, EventKind};
use escaperoom_core::walk::{
    augment, hitting_time_absorbing, hitting_time_mc, ht_table, WalkParams,
};

const MC_WALKS: u64 = 200_000;
const MC_SEED: u64 = 2024;
const SWEEP_SEED: u64 = 2024;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn check(ok: bool, detail: String) -> Outcome {
    let detail = detail.trim_end().to_string();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hitting_oracle() -> Outcome {
    let p = WalkParams::default();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for t in TEMPLATES {
        for drop in [false, true] {
            let aug = augment(&t.graph(), drop);
            let exact = hitting_time_absorbing(&aug, &p)
                .map_err(|e| e.to_string())?
                .value;
            let mc = hitting_time_mc(&aug, &p, MC_WALKS, MC_SEED).map_err(|e| e.to_string())?;
            let z = (exact - mc.value).abs() / mc.stderr.unwrap_or(f64::NAN);
            worst = worst.max(z);
            if z.is_nan() || z > 3.0 {
                bad.push(format!("{t}{}: z={z:.2}", if drop { "+drop" } else { "" }));
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "14 rows, {MC_WALKS} walks each, max |z| = {worst:.2} {}",
            bad.join(" ")
        ),
    )
}

fn two_state_chain() -> Outcome {
    let g = DependencyGraph::new(
        vec![GoalNode::start(), GoalNode::exit()],
        vec![("start".into(), "exit".into())],
        BTreeMap::new(),
        BTreeMap::new(),
    )
    .map_err(|e| e.to_string())?;
    let aug = augment(&g, false);
    let p = WalkParams::default();
    let exact = hitting_time_absorbing(&aug, &p)
        .map_err(|e| e.to_string())?
        .value;
    let mc = hitting_time_mc(&aug, &p, MC_WALKS, MC_SEED).map_err(|e| e.to_string())?;
    let want = 1.0 / 0.19;
    let se = mc.stderr.unwrap_or(f64::NAN);
    let z = (mc.value - want).abs() / se;
    check(
        aug.n() == 2 && (exact - want).abs() <= 1e-9 && z <= 3.0,
        format!(
            "states={} analytic={exact:.9} (want {want:.9}) mc={:.4}±{se:.4} z={z:.2}",
            aug.n(),
            mc.value
        ),
    )
}

fn structure() -> Outcome {
    let depths: Vec<usize> = TEMPLATES.iter().map(|t| t.graph().exit_depth()).collect();
    let widths: Vec<usize> = TEMPLATES.iter().map(|t| t.graph().width()).collect();
    check(
        depths == [2, 2, 4, 2, 2, 4, 6] && widths == [1, 2, 1, 2, 3, 2, 1],
        format!("depths={depths:?} widths={widths:?}"),
    )
}

fn hitting_ranks() -> Outcome {
    let p = WalkParams::default();
    let col = |drop| -> Result<Vec<f64>, String> {
        Ok(ht_table(&TEMPLATES, drop, &p)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| r.hitting_time)
            .collect())
    };
    let (plain, dropped) = (col(false)?, col(true)?);
    let reference_plain = [8.4, 12.1, 15.1, 13.1, 13.9, 29.2, 27.5];
    let reference_drop = [16.5, 25.2, 39.5, 27.5, 26.7, 86.1, 82.5];
    let rho_plain = spearman(&plain, &reference_plain).map_err(|e| e.to_string())?;
    let rho_drop = spearman(&dropped, &reference_drop).map_err(|e| e.to_string())?;
    let elementwise = plain.iter().zip(&dropped).all(|(a, b)| b > a);
    let chain = plain[0] < plain[2] && plain[2] < plain[6];
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.1}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    check(
        rho_plain >= 0.85 && rho_drop >= 0.85 && elementwise && chain,
        format!(
            "spearman nodrop={rho_plain:.4} drop={rho_drop:.4} drop>nodrop={elementwise} a<c<g={chain} HT=[{}] HT_drop=[{}]",
            fmt(&plain),
            fmt(&dropped)
        ),
    )
}

fn soundness_sweep() -> Outcome {
    let mut problems = Vec::new();
    let mut longest = 0;
    for t in TEMPLATES {
        let config = EnvConfig::for_template(t, SWEEP_SEED).with_max_steps(1000);
        let rooms = t.graph().rooms().count();
        for ep in 0..1000 {
            let w = GridWorld::generate_episode(config.clone(), ep).map_err(|e| e.to_string())?;
            let c = w.counts();
            if c.keys_on_floor != rooms || c.doors != rooms || w.rooms().len() != rooms + 1 {
                problems.push(format!(
                    "{t}#{ep}: keys={} doors={}",
                    c.keys_on_floor, c.doors
                ));
            }
        }
        let spec = RolloutSpec {
            config,
            agent: AgentKind::HippoOracle,
            mode: RewardMode::Sparse,
            episodes: 1000,
        };
        let traces = rollout(&spec).map_err(|e| e.to_string())?;
        for tr in traces.iter().filter(|tr| !tr.success) {
            problems.push(format!("{t}#{} failed", tr.episode));
        }
        longest = longest.max(traces.iter().map(|tr| tr.length).max().unwrap_or(0));
    }
    problems.truncate(5);
    check(
        problems.is_empty(),
        format!(
            "7000 worlds, success 100% required, longest episode {longest} steps {}",
            problems.join(" ")
        ),
    )
}

struct Scripted(Vec<Action>);

impl Policy for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn act(&mut self, _input: &PolicyInput<'_>) -> Result<Action, AgentError> {
        if self.0.is_empty() {
            return Err(AgentError::InvalidArgument("script exhausted".into()));
        }
        Ok(self.0.remove(0))
    }
}

struct RecordingMeta(DfsMeta, Vec<f64>);

impl MetaController for RecordingMeta {
    fn name(&self) -> &str {
        "recording"
    }

    fn reset(&mut self, episode: u64) {
        self.0.reset(episode);
    }

    fn next_goal(&mut self, obs: &Observation, world: &GridWorld) -> Option<Goal> {
        self.0.next_goal(obs, world)
    }

    fn update(&mut self, t: &MetaTransition<'_>) {
        self.1.push(t.reward);
    }
}

fn reward_routing() -> Outcome {
    let mut world =
        GridWorld::generate(EnvConfig::for_template(Template::A, 0)).map_err(|e| e.to_string())?;
    let red = world.colors()[&Color::Red];
    let mut sim = world.clone();
    let mut script = Vec::new();
    for goal in [Goal::Key(red), Goal::Door(red), Goal::Exit] {
        for a in plan(&sim, goal).map_err(|e| e.to_string())? {
            sim.step(a).map_err(|e| e.to_string())?;
            script.push(a);
        }
    }
    let mut meta = RecordingMeta(DfsMeta::new(Template::A.graph(), 0), Vec::new());
    let mut ctl = Scripted(script);
    let (trace, ledger) = run_hippo_episode(
        &mut world,
        &mut meta,
        &mut ctl,
        &DefaultCritic,
        &HippoOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let intrinsic_at: Vec<u32> = ledger
        .controller_rewards
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != 0.0)
        .map(|(i, _)| i as u32 + 1)
        .collect();
    let goal_events: Vec<u32> = trace
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::KeyPicked(_) | EventKind::DoorOpened(_)))
        .map(|e| e.timestep)
        .collect();
    let exit_step = trace
        .events
        .iter()
        .find(|e| e.kind == EventKind::ExitReached)
        .map(|e| e.timestep);
    let extrinsic_total: f64 = trace.steps.iter().map(|s| s.extrinsic).sum();
    let meta_sum: f64 = meta.1.iter().sum();
    let ok = trace.success
        && goal_events.len() == 2
        && intrinsic_at.iter().take(2).copied().collect::<Vec<_>>() == goal_events
        && intrinsic_at.len() == 3
        && Some(intrinsic_at[2]) == exit_step
        && extrinsic_total == 1.0
        && meta.1.iter().filter(|&&r| r == 1.0).count() == 1
        && meta_sum == 1.0
        && meta.1.last() == Some(&1.0);
    check(
        ok,
        format!(
            "intrinsic at steps {intrinsic_at:?}, key/door events at {goal_events:?}, exit at {exit_step:?}, meta rewards {:?}",
            meta.1
        ),
    )
}

fn random_trend() -> Outcome {
    let p = WalkParams::default();
    let ht: Vec<f64> = ht_table(&TEMPLATES, false, &p)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.hitting_time)
        .collect();
    let mut rates = Vec::new();
    for t in TEMPLATES {
        let spec = RolloutSpec {
            config: EnvConfig::for_template(t, SWEEP_SEED).with_max_steps(1000),
            agent: AgentKind::Random,
            mode: RewardMode::Sparse,
            episodes: 500,
        };
        let traces = rollout(&spec).map_err(|e| e.to_string())?;
        rates.push(summarize(&traces).map_err(|e| e.to_string())?.success_rate);
    }
    let r = pearson(&ht, &rates).map_err(|e| e.to_string())?;
    let shown = rates
        .iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(",");
    check(
        r < 0.0,
        format!("pearson(HT, success) = {r:.4}, success=[{shown}]"),
    )
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_escaperoom"));
    c.env_remove("ESCAPE_GRAPH_SEED");
    c
}

fn golden_transcript() -> Outcome {
    let golden = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/golden/protocol_v1.transcript"
    ));
    let mut child = bin()
        .args(["serve", "--port", "0"])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut banner = String::new();
    BufReader::new(child.stderr.take().expect("piped"))
        .read_line(&mut banner)
        .map_err(|e| e.to_string())?;
    let result = (|| {
        let addr = banner
            .trim()
            .strip_prefix("listening on ")
            .ok_or_else(|| format!("unexpected banner {banner:?}"))?;
        let mut writer = TcpStream::connect(addr).map_err(|e| e.to_string())?;
        let mut reader = BufReader::new(writer.try_clone().map_err(|e| e.to_string())?);
        let mut checked = 0;
        let mut pending = None;
        for line in golden.lines() {
            if let Some(req) = line.strip_prefix("> ") {
                writeln!(writer, "{req}").map_err(|e| e.to_string())?;
                let mut got = String::new();
                reader.read_line(&mut got).map_err(|e| e.to_string())?;
                pending = Some(got.trim_end_matches('\n').to_string());
            } else if let Some(want) = line.strip_prefix("< ") {
                let got = pending.take().ok_or("response without request")?;
                if got != want {
                    return Err(format!("line {}: got {got}", checked + 1));
                }
                checked += 1;
            }
        }
        Ok(format!("{checked} responses byte-identical over TCP"))
    })();
    let _ = child.kill();
    let _ = child.wait();
    result
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = bin()
        .args(args)
        .args(["--threads", threads])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism(dir: &Path) -> Outcome {
    let file = |name: &str| dir.join(name).display().to_string();
    let mut details = Vec::new();
    let cases: Vec<(&str, Vec<String>, Option<String>)> = vec![
        (
            "gen",
            vec![
                "gen".into(),
                "--template".into(),
                "g".into(),
                "--seed".into(),
                "5".into(),
                "--dump".into(),
                file("world-{}.json"),
            ],
            Some(file("world-{}.json")),
        ),
        (
            "rollout",
            vec![
                "rollout".into(),
                "--agent".into(),
                "random".into(),
                "--templates".into(),
                "a..g".into(),
                "--episodes".into(),
                "40".into(),
                "--seed".into(),
                "9".into(),
                "--out".into(),
                file("traces-{}.jsonl"),
            ],
            Some(file("traces-{}.jsonl")),
        ),
        (
            "analyze --mc",
            vec![
                "analyze".into(),
                "--mc".into(),
                "--walks".into(),
                "50000".into(),
                "--seed".into(),
                "3".into(),
            ],
            None,
        ),
    ];
    for (name, args, artifact) in cases {
        let mut outputs = Vec::new();
        for (run, threads) in [(0, "1"), (1, "1"), (2, "3")] {
            let args: Vec<String> = args
                .iter()
                .map(|a| a.replace("{}", &run.to_string()))
                .collect();
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            let stdout = run_cli(&refs, threads)?;
            let file = match &artifact {
                Some(p) => {
                    std::fs::read(p.replace("{}", &run.to_string())).map_err(|e| e.to_string())?
                }
                None => Vec::new(),
            };
            outputs.push((stdout, file));
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        details.push(format!(
            "{name}={}",
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    check(
        details.iter().all(|d| d.ends_with("identical")),
        format!("3 runs (threads 1,1,3): {}", details.join(" ")),
    )
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("escaperoom-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn main() {
    let dir = scratch_dir();
    let criteria: Vec<Criterion> = vec![
        ("hitting-time oracle equivalence", Box::new(hitting_oracle)),
        ("two-state closed form", Box::new(two_state_chain)),
        ("exit depth and width", Box::new(structure)),
        ("hitting-time rank order", Box::new(hitting_ranks)),
        ("environment soundness sweep", Box::new(soundness_sweep)),
        ("hierarchical reward routing", Box::new(reward_routing)),
        ("random success vs hitting time", Box::new(random_trend)),
        ("protocol golden transcript", Box::new(golden_transcript)),
        (
            "determinism",
            Box::new({
                let dir = dir.clone();
                move || determinism(&dir)
            }),
        ),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {} {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {} {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
