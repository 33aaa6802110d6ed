use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Context;
use escaperoom_core::agents::{rollout, AgentKind, RewardMode, RolloutSpec};
use escaperoom_core::env::EnvConfig;
use escaperoom_core::metrics::{summarize, write_trace, MetricsSummary};
use serde_json::json;

use crate::output::{emit, f4, json as to_json, kv, Table};
use crate::{parse_templates, Format, Globals, TemplateList, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// random, oracle or hippo-oracle.
    #[arg(long, default_value = "random")]
    agent: AgentKind,

    /// Templates to run, e.g. `a` or `a..g`.
    #[arg(long, alias = "template", value_parser = parse_templates, default_value = "a")]
    templates: TemplateList,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 100)]
    episodes: u64,

    /// sparse, bonus or sketch.
    #[arg(long, default_value = "sparse")]
    mode: RewardMode,

    #[arg(long, default_value_t = EnvConfig::DEFAULT_MAX_STEPS)]
    max_steps: u32,

    #[arg(long, default_value_t = EnvConfig::DEFAULT_ROOM_SIZE)]
    room_size: u32,

    /// Enable the drop action.
    #[arg(long)]
    drop: bool,
}

pub fn run(g: &Globals, args: Args) -> anyhow::Result<()> {
    let specs: Vec<RolloutSpec> = args
        .templates
        .0
        .iter()
        .map(|&t| RolloutSpec {
            config: EnvConfig::for_template(t, g.seed)
                .with_max_steps(args.max_steps)
                .with_room_size(args.room_size)
                .with_drop(args.drop),
            agent: args.agent,
            mode: args.mode,
            episodes: args.episodes,
        })
        .collect();
    for spec in &specs {
        spec.validate().map_err(|e| UsageError(e.to_string()))?;
    }

    let mut log = match &g.out {
        Some(path) => {
            Some(BufWriter::new(File::create(path).with_context(|| {
                format!("cannot create {}", path.display())
            })?))
        }
        None => None,
    };
    let mut summaries: Vec<MetricsSummary> = Vec::new();
    for spec in &specs {
        let traces = rollout(spec)?;
        if let Some(log) = log.as_mut() {
            for t in &traces {
                write_trace(log, t)?;
            }
        }
        summaries.push(summarize(&traces)?);
    }
    if let Some(mut log) = log {
        log.flush()?;
    }

    let text = match g.format {
        Format::Tsv => render_tsv(g, &args, &summaries),
        Format::Json => to_json(&json!({
            "seed": g.seed,
            "agent": args.agent.name(),
            "mode": args.mode.name(),
            "episodes": args.episodes,
            "max_steps": args.max_steps,
            "drop": args.drop,
            "summaries": summaries,
        })),
    };
    emit(None, &text)
}

fn render_tsv(g: &Globals, args: &Args, summaries: &[MetricsSummary]) -> String {
    let meta = vec![
        kv("seed", g.seed),
        kv("agent", args.agent),
        kv("mode", args.mode),
        kv("episodes", args.episodes),
        kv("max_steps", args.max_steps),
        kv("drop", args.drop),
    ];
    let mut table = Table::new(
        meta,
        vec![
            "template",
            "episodes",
            "successes",
            "success_pct",
            "avg_episode_length_pct",
        ],
    );
    let mut goals = Table::new(
        Vec::new(),
        vec!["template", "goal", "achieved", "mean_timestep"],
    );
    for s in summaries {
        table.push(vec![
            s.template.clone(),
            s.episodes.to_string(),
            s.successes.to_string(),
            f4(s.success_rate * 100.0),
            f4(s.avg_episode_length_pct),
        ]);
        for (goal, stat) in &s.per_goal {
            goals.push(vec![
                s.template.clone(),
                goal.clone(),
                stat.achieved.to_string(),
                f4(stat.mean_timestep),
            ]);
        }
    }
    format!("{}\n{}", table.render(), goals.render())
}
