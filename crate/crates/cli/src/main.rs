mod analyze;
mod correlate;
mod gen;
mod output;
mod rollout;
mod serve;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use escaperoom_core::graph::{Template, TEMPLATES};

#[derive(Parser, Debug)]
#[command(
    name = "escaperoom",
    version,
    about = "Exploration complexity of goal-dependency graphs and the EscapeRoom gridworld"
)]
struct Cli {
    /// Base seed for everything random.
    #[arg(long, global = true, env = "ESCAPE_GRAPH_SEED", default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    /// Where the command's artifact goes instead of stdout. For `rollout`
    /// and `serve` this is the trace log.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: one per core). Output does not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exit depth, width and random-walk hitting times.
    Analyze(analyze::Args),
    /// Generate a world; print a summary or dump it.
    Gen(gen::Args),
    /// Run a scripted agent and summarize the episodes.
    Rollout(rollout::Args),
    /// Pearson correlation between two table columns.
    Correlate(correlate::Args),
    /// Serve environments over the line protocol.
    Serve(serve::Args),
}

pub struct Globals {
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Bad flag combinations found after parsing; exit code 1 like clap errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateList(pub Vec<Template>);

/// Accepts `a`, `a,c,g` and ranges such as `a..g` or `b..d,g`.
pub fn parse_templates(s: &str) -> Result<TemplateList, String> {
    let index = |part: &str| -> Result<usize, String> {
        let t: Template = part.parse().map_err(|e| format!("{e}"))?;
        Ok(TEMPLATES.iter().position(|&x| x == t).expect("listed"))
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (index(lo)?, index(hi)?);
                if lo > hi {
                    return Err(format!("empty template range {part:?}"));
                }
                out.extend(&TEMPLATES[lo..=hi]);
            }
            None => out.push(TEMPLATES[index(part)?]),
        }
    }
    Ok(TemplateList(out))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()?;
    }
    let g = Globals {
        seed: cli.seed,
        format: cli.format,
        out: cli.out,
    };
    match cli.command {
        Command::Analyze(a) => analyze::run(&g, a),
        Command::Gen(a) => gen::run(&g, a),
        Command::Rollout(a) => rollout::run(&g, a),
        Command::Correlate(a) => correlate::run(&g, a),
        Command::Serve(a) => serve::run(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 1 } else { 2 })
        }
    }
}
