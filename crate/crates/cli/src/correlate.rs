use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use escaperoom_core::metrics::{pearson, spearman};
use serde_json::json;

use crate::output::{emit, f4, json as to_json, kv, Table};
use crate::{Format, Globals};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Table holding the metric column, e.g. `rollout` output.
    metrics: PathBuf,

    /// Table holding the hitting-time column, e.g. `analyze` output.
    ht: PathBuf,

    #[arg(long, default_value = "success_pct")]
    metrics_column: String,

    #[arg(long, default_value = "ht_nodrop")]
    ht_column: String,
}

/// First table block of a TSV file: `#` lines are skipped, the first other
/// line is the header, and a blank line ends the block.
struct Block {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Block {
    fn read(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header: Vec<String> = match lines.next() {
            Some(h) if !h.trim().is_empty() => h.split('\t').map(str::to_string).collect(),
            _ => bail!("{}: no table header", path.display()),
        };
        let rows: Vec<Vec<String>> = lines
            .take_while(|l| !l.trim().is_empty())
            .map(|l| l.split('\t').map(str::to_string).collect())
            .collect();
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.get(i).map_or("", String::as_str))
                .collect(),
        )
    }

    fn numbers(&self, name: &str, path: &Path) -> anyhow::Result<Vec<f64>> {
        let col = self
            .column(name)
            .with_context(|| format!("{}: no column {name:?}", path.display()))?;
        col.iter()
            .enumerate()
            .map(|(i, v)| {
                v.parse::<f64>().with_context(|| {
                    format!(
                        "{}: row {}: {name} is not a number: {v:?}",
                        path.display(),
                        i + 1
                    )
                })
            })
            .collect()
    }
}

pub fn run(g: &Globals, args: Args) -> anyhow::Result<()> {
    let m = Block::read(&args.metrics)?;
    let h = Block::read(&args.ht)?;
    let xs = m.numbers(&args.metrics_column, &args.metrics)?;
    let ys = h.numbers(&args.ht_column, &args.ht)?;
    if xs.len() != ys.len() {
        bail!(
            "row counts differ: {} has {}, {} has {}",
            args.metrics.display(),
            xs.len(),
            args.ht.display(),
            ys.len()
        );
    }
    if let (Some(a), Some(b)) = (m.column("template"), h.column("template")) {
        if a != b {
            bail!("template columns differ: {a:?} vs {b:?}");
        }
    }
    let r = pearson(&xs, &ys)?;
    let rho = spearman(&xs, &ys)?;

    let x = format!("{}:{}", args.metrics.display(), args.metrics_column);
    let y = format!("{}:{}", args.ht.display(), args.ht_column);
    let text = match g.format {
        Format::Tsv => {
            let mut t = Table::new(
                vec![kv("x", &x), kv("y", &y)],
                vec!["n", "pearson", "spearman"],
            );
            t.push(vec![xs.len().to_string(), f4(r), f4(rho)]);
            t.render()
        }
        Format::Json => {
            to_json(&json!({"x": x, "y": y, "n": xs.len(), "pearson": r, "spearman": rho}))
        }
    };
    emit(g.out.as_deref(), &text)
}
