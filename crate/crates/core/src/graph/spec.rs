//! `.goalgraph.json` documents.
//!
//! ```json
//! {
//!   "nodes": [{"id": "start", "kind": "start", "color": null}, ...],
//!   "edges": [["start", "key_red"], ...],
//!   "key_location": {"key_red": "start"},
//!   "door_host": {"room_red": "start"}
//! }
//! ```
//!
//! Unknown fields are rejected. [`serialize_spec`] writes the canonical
//! form: nodes in (kind, colour) order, one node or edge per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;

use super::{Color, DependencyGraph, GoalNode, GraphError, NodeKind};

pub const GRAPH_SPEC_EXTENSION: &str = ".goalgraph.json";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    nodes: Vec<SpecNode>,
    edges: Vec<(String, String)>,
    key_location: BTreeMap<String, String>,
    door_host: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecNode {
    id: String,
    kind: NodeKind,
    color: Option<Color>,
}

pub fn parse_spec(text: &str) -> Result<DependencyGraph, GraphError> {
    let doc: SpecDoc = serde_json::from_str(text).map_err(|e| GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| GoalNode::new(n.id, n.kind, n.color))
        .collect();
    DependencyGraph::new(nodes, doc.edges, doc.key_location, doc.door_host)
}

pub fn serialize_spec(graph: &DependencyGraph) -> String {
    let q = |s: &str| serde_json::to_string(s).expect("string serializes");
    let mut out = String::from("{\n  \"nodes\": [\n");
    let nodes = graph.nodes();
    for (i, n) in nodes.iter().enumerate() {
        let color = n.color.map_or("null".to_string(), |c| q(c.name()));
        let sep = if i + 1 < nodes.len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"id\": {}, \"kind\": {}, \"color\": {color}}}{sep}",
            q(&n.id),
            q(n.kind.name())
        );
    }
    out.push_str("  ],\n  \"edges\": [\n");
    let edges = graph.edges();
    for (i, (f, t)) in edges.iter().enumerate() {
        let sep = if i + 1 < edges.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}, {}]{sep}", q(f), q(t));
    }
    out.push_str("  ],\n");
    write_map(&mut out, "key_location", graph.key_location(), true);
    write_map(&mut out, "door_host", graph.door_host(), false);
    out.push_str("}\n");
    out
}

fn write_map(out: &mut String, name: &str, map: &BTreeMap<String, String>, trailing_comma: bool) {
    let q = |s: &str| serde_json::to_string(s).expect("string serializes");
    let _ = write!(out, "  \"{name}\": {{");
    if map.is_empty() {
        out.push('}');
    } else {
        out.push('\n');
        for (i, (k, v)) in map.iter().enumerate() {
            let sep = if i + 1 < map.len() { "," } else { "" };
            let _ = writeln!(out, "    {}: {}{sep}", q(k), q(v));
        }
        out.push_str("  }");
    }
    out.push_str(if trailing_comma { ",\n" } else { "\n" });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TEMPLATES;

    const MINIMAL: &str = r#"{
        "nodes": [
            {"id": "exit", "kind": "exit", "color": null},
            {"id": "k", "kind": "key", "color": "red"},
            {"id": "r", "kind": "room", "color": "red"},
            {"id": "s", "kind": "start", "color": null}
        ],
        "edges": [["s", "k"], ["k", "r"], ["r", "exit"]],
        "key_location": {"k": "s"},
        "door_host": {"r": "s"}
    }"#;

    #[test]
    fn parses_minimal_graph() {
        let g = parse_spec(MINIMAL).unwrap();
        assert_eq!(g.nodes().len(), 4);
        assert_eq!(g.nodes()[0].id, "s");
        assert_eq!(g.exit_depth(), 2);
    }

    #[test]
    fn cycle_rejected() {
        let text = MINIMAL.replace(r#"["r", "exit"]"#, r#"["r", "exit"], ["r", "k"]"#);
        assert!(matches!(parse_spec(&text), Err(GraphError::Cycle(_))));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_spec("{\n  \"nodes\": [,\n}").unwrap_err();
        match err {
            GraphError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replacen('{', "{\"weights\": [],", 1);
        assert!(matches!(parse_spec(&text), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn templates_round_trip() {
        for t in TEMPLATES {
            let g = t.graph();
            let text = serialize_spec(&g);
            assert_eq!(parse_spec(&text).unwrap(), g, "template {t}");
            assert_eq!(serialize_spec(&parse_spec(&text).unwrap()), text);
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let g = crate::graph::load_template("a").unwrap();
        assert_eq!(serialize_spec(&g), serialize_spec(&g.clone()));
    }

    #[test]
    fn degenerate_graph_serializes() {
        let g = DependencyGraph::new(
            vec![GoalNode::exit(), GoalNode::start()],
            vec![("start".into(), "exit".into())],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let text = serialize_spec(&g);
        assert!(text.contains("\"key_location\": {},"));
        assert_eq!(parse_spec(&text).unwrap(), g);
    }
}
