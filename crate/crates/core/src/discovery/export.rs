use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ChannelPairResult, DependencyGraph, EdgeEvidence, EdgeKey};
use crate::num::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(format!("unknown graph format `{other}`")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<String>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    service: String,
    q_value: f64,
    n_delays: usize,
    statistic: f64,
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the graph with nodes and edges in lexicographic order.
pub fn export_graph(g: &DependencyGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => {
            let mut out = String::from("digraph constellation {\n");
            for node in &g.nodes {
                let _ = writeln!(out, "  {};", dot_quote(node));
            }
            for (k, e) in &g.edges {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label={}, q_value=\"{}\", n_delays={}];",
                    dot_quote(&k.from),
                    dot_quote(&k.to),
                    dot_quote(&k.service),
                    fmt_f64(e.q_value),
                    e.n_delays
                );
            }
            out.push_str("}\n");
            out
        }
        GraphFormat::Json => {
            let doc = GraphJson {
                nodes: g.nodes.iter().cloned().collect(),
                edges: g
                    .edges
                    .iter()
                    .map(|(k, e)| EdgeJson {
                        from: k.from.clone(),
                        to: k.to.clone(),
                        service: k.service.clone(),
                        q_value: e.q_value,
                        n_delays: e.n_delays,
                        statistic: e.statistic,
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("graph serialises");
            s.push('\n');
            s
        }
    }
}

/// Reads back the JSON produced by [`export_graph`]. Unknown top-level keys are ignored.
pub fn import_graph_json(text: &str) -> Result<DependencyGraph, serde_json::Error> {
    let doc: GraphJson = serde_json::from_str(text)?;
    let mut g = DependencyGraph { nodes: doc.nodes.into_iter().collect(), ..Default::default() };
    for e in doc.edges {
        g.add_edge(
            EdgeKey::new(&e.from, &e.to, &e.service),
            EdgeEvidence { q_value: e.q_value, n_delays: e.n_delays, statistic: e.statistic },
        );
    }
    Ok(g)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

/// CSV rows `host,input,output,n_delays,statistic,p_value,log_odds,q_value,dependent,status`
/// (no header).
pub fn write_pair_table(host: &str, results: &[ChannelPairResult], out: &mut String) {
    for r in results {
        let status = if r.insufficient_data { "insufficient-data" } else { "tested" };
        let _ = writeln!(
            out,
            "{host},{},{},{},{},{},{},{},{},{status}",
            r.input,
            r.output,
            r.n_delays,
            opt(r.ks.as_ref().map(|k| k.statistic)),
            opt(r.ks.as_ref().map(|k| k.p_value)),
            opt(r.log_odds),
            fmt_f64(r.q_value),
            r.dependent,
        );
    }
}

pub const PAIR_TABLE_HEADER: &str = "host,input,output,n_delays,statistic,p_value,log_odds,q_value,dependent,status";

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DependencyGraph {
        let mut g = DependencyGraph::default();
        let e = EdgeEvidence { q_value: 0.0125, n_delays: 31, statistic: 0.5 };
        g.add_edge(EdgeKey::new("x", "h", "http"), e);
        g.add_edge(EdgeKey::new("h", "y", "dns"), e);
        g
    }

    #[test]
    fn empty_dot() {
        let dot = export_graph(&DependencyGraph::default(), GraphFormat::Dot);
        let squashed: String = dot.split_whitespace().collect::<Vec<_>>().join(" ");
        assert_eq!(squashed, "digraph constellation { }");
    }

    #[test]
    fn dot_edges_sorted() {
        let dot = export_graph(&sample(), GraphFormat::Dot);
        let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges.len(), 2);
        assert!(edges[0].starts_with("  \"h\" -> \"y\""));
        assert!(edges[1].starts_with("  \"x\" -> \"h\""));
        assert!(edges[1].contains("label=\"http\""));
        assert!(edges[1].contains("q_value=\"0.0125\""));
    }

    #[test]
    fn json_schema_and_round_trip() {
        let g = sample();
        let text = export_graph(&g, GraphFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["nodes"], serde_json::json!(["h", "x", "y"]));
        assert_eq!(v["edges"][0]["from"], "h");
        assert_eq!(v["edges"][0]["n_delays"], 31);
        assert_eq!(import_graph_json(&text).unwrap(), g);
    }
}
