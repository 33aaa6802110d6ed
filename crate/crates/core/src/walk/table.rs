use super::{augment, hitting_time_absorbing, hitting_time_mc, WalkError, WalkParams};
use crate::graph::{DependencyGraph, Template};

#[derive(Debug, Clone, PartialEq)]
pub struct HtRow {
    pub template: Template,
    pub exit_depth: usize,
    pub width: usize,
    pub hitting_time: f64,
}

/// Depth, width and root-to-exit hitting time per template.
pub fn ht_table(
    templates: &[Template],
    drop_key: bool,
    params: &WalkParams,
) -> Result<Vec<HtRow>, WalkError> {
    templates
        .iter()
        .map(|&t| {
            let g = t.graph();
            let ht = hitting_time_absorbing(&augment(&g, drop_key), params)?;
            Ok(HtRow {
                template: t,
                exit_depth: g.exit_depth(),
                width: g.width(),
                hitting_time: ht.value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub walks: u64,
    pub seed: u64,
    /// Which variant the Monte-Carlo columns estimate.
    pub drop_key: bool,
}

/// One line of the `analyze` table.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub label: String,
    pub exit_depth: usize,
    pub width: usize,
    pub ht_nodrop: f64,
    pub ht_drop: f64,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
}

pub fn analyze_graph(
    label: &str,
    graph: &DependencyGraph,
    params: &WalkParams,
    mc: Option<McSettings>,
) -> Result<AnalysisRow, WalkError> {
    let plain = augment(graph, false);
    let dropped = augment(graph, true);
    let ht_nodrop = hitting_time_absorbing(&plain, params)?.value;
    let ht_drop = hitting_time_absorbing(&dropped, params)?.value;
    let (mc_mean, mc_stderr) = match mc {
        Some(s) => {
            let aug = if s.drop_key { &dropped } else { &plain };
            let r = hitting_time_mc(aug, params, s.walks, s.seed)?;
            (Some(r.value), r.stderr)
        }
        None => (None, None),
    };
    Ok(AnalysisRow {
        label: label.to_string(),
        exit_depth: graph.exit_depth(),
        width: graph.width(),
        ht_nodrop,
        ht_drop,
        mc_mean,
        mc_stderr,
    })
}
