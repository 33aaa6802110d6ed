use std::io::{stdin, stdout};
use std::sync::Arc;

use anyhow::Context;
use escaperoom_core::agents::RewardMode;
use escaperoom_core::env::EnvConfig;
use escaperoom_core::graph::Template;
use escaperoom_core::server::{serve_stdio, Server, SessionDefaults, TraceSink, DEFAULT_PORT};

use crate::Globals;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Serve one session on standard input/output instead of TCP.
    #[arg(long)]
    stdio: bool,

    #[arg(long, default_value = "127.0.0.1")]
    host: String,

    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,

    /// Defaults for `reset` requests that leave a field out.
    #[arg(long, default_value_t = Template::A)]
    template: Template,

    #[arg(long, default_value = "sparse")]
    mode: RewardMode,

    #[arg(long, default_value_t = EnvConfig::DEFAULT_MAX_STEPS)]
    max_steps: u32,

    #[arg(long, default_value_t = EnvConfig::DEFAULT_ROOM_SIZE)]
    room_size: u32,

    #[arg(long)]
    drop: bool,
}

pub fn run(g: &Globals, args: Args) -> anyhow::Result<()> {
    let defaults = SessionDefaults {
        template: args.template,
        seed: g.seed,
        mode: args.mode,
        drop_enabled: args.drop,
        max_steps: args.max_steps,
        room_size: args.room_size,
    };
    let sink = match &g.out {
        Some(path) => {
            Some(Arc::new(TraceSink::open(path).with_context(|| {
                format!("cannot open {}", path.display())
            })?))
        }
        None => None,
    };
    if args.stdio {
        serve_stdio(stdin().lock(), stdout().lock(), defaults, sink)?;
        return Ok(());
    }
    let server = Server::bind(&format!("{}:{}", args.host, args.port), defaults, sink)?;
    eprintln!("listening on {}", server.local_addr()?);
    server.run()?;
    Ok(())
}
