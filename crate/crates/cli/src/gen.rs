use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use escaperoom_core::env::{check_solvable, EnvConfig, GridWorld};
use escaperoom_core::graph::{parse_spec, Template};
use serde_json::json;

use crate::output::{emit, json as to_json, kv, Table};
use crate::{Format, Globals};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, default_value_t = Template::A, conflicts_with = "graph")]
    template: Template,

    /// Custom `.goalgraph.json` spec instead of a template.
    #[arg(long)]
    graph: Option<PathBuf>,

    /// Episode index; each episode is a fresh layout from the same seed.
    #[arg(long, default_value_t = 0)]
    episode: u64,

    #[arg(long, default_value_t = EnvConfig::DEFAULT_MAX_STEPS)]
    max_steps: u32,

    /// Interior cells per room side.
    #[arg(long, default_value_t = EnvConfig::DEFAULT_ROOM_SIZE)]
    room_size: u32,

    /// Enable the drop action.
    #[arg(long)]
    drop: bool,

    /// Write the world file here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

pub fn run(g: &Globals, args: Args) -> anyhow::Result<()> {
    let config = match &args.graph {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let graph = parse_spec(&text)
                .with_context(|| format!("invalid graph spec {}", path.display()))?;
            EnvConfig::new(graph, g.seed)
        }
        None => EnvConfig::for_template(args.template, g.seed),
    }
    .with_max_steps(args.max_steps)
    .with_drop(args.drop)
    .with_room_size(args.room_size);

    let world = GridWorld::generate_episode(config.clone(), args.episode)?;
    let solve_steps = check_solvable(&world)?;
    if let Some(path) = &args.dump {
        let mut text = world.to_world_file();
        text.push('\n');
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let c = world.counts();
    let keys = c.keys_on_floor + c.keys_carried;
    let rooms = world.rooms().len();
    let depth = config.graph.exit_depth();
    let text = match g.format {
        Format::Tsv => {
            let mut table = Table::new(
                vec![kv("seed", g.seed), kv("episode", args.episode)],
                vec![
                    "template",
                    "width",
                    "height",
                    "rooms",
                    "keys",
                    "doors",
                    "exit_depth",
                    "solve_steps",
                ],
            );
            table.push(vec![
                config.label(),
                world.width().to_string(),
                world.height().to_string(),
                rooms.to_string(),
                keys.to_string(),
                c.doors.to_string(),
                depth.to_string(),
                solve_steps.to_string(),
            ]);
            table.render()
        }
        Format::Json => to_json(&json!({
            "seed": g.seed,
            "episode": args.episode,
            "template": config.label(),
            "width": world.width(),
            "height": world.height(),
            "rooms": rooms,
            "keys": keys,
            "doors": c.doors,
            "exit_depth": depth,
            "solve_steps": solve_steps,
        })),
    };
    emit(g.out.as_deref(), &text)
}
