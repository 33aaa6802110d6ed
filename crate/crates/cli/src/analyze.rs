use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use escaperoom_core::graph::{parse_spec, DependencyGraph, TEMPLATES};
use escaperoom_core::walk::{analyze_graph, McSettings, WalkParams};
use serde_json::json;

use crate::output::{emit, f4, json as to_json, kv, opt4, Table};
use crate::{parse_templates, Format, Globals, TemplateList, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Templates to analyze, e.g. `a..g` or `a,c`. Defaults to all of them
    /// unless `--graph` is given.
    #[arg(long, value_parser = parse_templates)]
    templates: Option<TemplateList>,

    /// Custom `.goalgraph.json` spec; may be repeated.
    #[arg(long)]
    graph: Vec<PathBuf>,

    /// Add Monte-Carlo columns.
    #[arg(long)]
    mc: bool,

    /// Monte-Carlo walks per row.
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    walks: u64,

    /// Estimate the drop-key variant in the Monte-Carlo columns.
    #[arg(long)]
    drop_key: bool,

    /// Probability of advancing along an edge per step.
    #[arg(long, default_value_t = WalkParams::default().advance_prob())]
    advance: f64,

    /// Probability of restarting at the root per step.
    #[arg(long, default_value_t = WalkParams::default().restart_prob())]
    restart: f64,
}

pub fn run(g: &Globals, args: Args) -> anyhow::Result<()> {
    let params = WalkParams::with_advance(args.advance, args.restart)
        .map_err(|e| UsageError(e.to_string()))?;

    let mut graphs: Vec<(String, DependencyGraph)> = Vec::new();
    let templates = match (&args.templates, args.graph.is_empty()) {
        (Some(t), _) => t.0.clone(),
        (None, true) => TEMPLATES.to_vec(),
        (None, false) => Vec::new(),
    };
    graphs.extend(templates.iter().map(|t| (t.to_string(), t.graph())));
    for path in &args.graph {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let graph =
            parse_spec(&text).with_context(|| format!("invalid graph spec {}", path.display()))?;
        graphs.push((path.display().to_string(), graph));
    }

    let mc = args.mc.then_some(McSettings {
        walks: args.walks,
        seed: g.seed,
        drop_key: args.drop_key,
    });
    let rows = graphs
        .iter()
        .map(|(label, graph)| analyze_graph(label, graph, &params, mc))
        .collect::<Result<Vec<_>, _>>()?;

    let variant = if args.drop_key { "drop" } else { "nodrop" };
    let text = match g.format {
        Format::Tsv => {
            let mut meta = vec![
                kv("seed", g.seed),
                kv("stay", f4(params.stay_prob())),
                kv("advance", f4(params.advance_prob())),
                kv("restart", f4(params.restart_prob())),
            ];
            if let Some(mc) = mc {
                meta.push(kv("mc_walks", mc.walks));
                meta.push(kv("mc_variant", variant));
            }
            let mut table = Table::new(
                meta,
                vec![
                    "template",
                    "exit_depth",
                    "width",
                    "ht_nodrop",
                    "ht_drop",
                    "mc_mean",
                    "mc_stderr",
                ],
            );
            for r in &rows {
                table.push(vec![
                    r.label.clone(),
                    r.exit_depth.to_string(),
                    r.width.to_string(),
                    f4(r.ht_nodrop),
                    f4(r.ht_drop),
                    opt4(r.mc_mean),
                    opt4(r.mc_stderr),
                ]);
            }
            table.render()
        }
        Format::Json => to_json(&json!({
            "seed": g.seed,
            "params": {
                "stay": params.stay_prob(),
                "advance": params.advance_prob(),
                "restart": params.restart_prob(),
            },
            "mc": mc.map(|m| json!({"walks": m.walks, "variant": variant})),
            "rows": rows.iter().map(|r| json!({
                "template": r.label,
                "exit_depth": r.exit_depth,
                "width": r.width,
                "ht_nodrop": r.ht_nodrop,
                "ht_drop": r.ht_drop,
                "mc_mean": r.mc_mean,
                "mc_stderr": r.mc_stderr,
            })).collect::<Vec<_>>(),
        })),
    };
    emit(g.out.as_deref(), &text)
}
