use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::ChannelPairResult;

/// A directed, service-labelled edge. Ordering is lexicographic on
/// `(from, to, service)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub from: String,
    pub to: String,
    pub service: String,
}

impl EdgeKey {
    pub fn new(from: &str, to: &str, service: &str) -> Self {
        Self { from: from.into(), to: to.into(), service: service.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvidence {
    pub q_value: f64,
    pub n_delays: usize,
    pub statistic: f64,
}

impl EdgeEvidence {
    /// Smaller q wins; then more delays; then a larger statistic.
    fn stronger_than(&self, other: &Self) -> bool {
        self.q_value
            .total_cmp(&other.q_value)
            .reverse()
            .then(self.n_delays.cmp(&other.n_delays))
            .then(self.statistic.total_cmp(&other.statistic))
            .is_gt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<EdgeKey, EdgeEvidence>,
}

impl DependencyGraph {
    pub fn add_edge(&mut self, key: EdgeKey, evidence: EdgeEvidence) {
        self.nodes.insert(key.from.clone());
        self.nodes.insert(key.to.clone());
        match self.edges.get_mut(&key) {
            Some(existing) if !evidence.stronger_than(existing) => {}
            Some(existing) => *existing = evidence,
            None => {
                self.edges.insert(key, evidence);
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Every node reachable from `start` along directed edges, excluding `start`
    /// unless it lies on a cycle.
    pub fn reachable_from(&self, start: &str) -> BTreeSet<String> {
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for key in self.edges.keys() {
            adjacency.entry(&key.from).or_default().push(&key.to);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            for &next in adjacency.get(node).into_iter().flatten() {
                if seen.insert(next.to_owned()) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }
}

/// Merges per-host results into one graph.
///
/// A dependent pair `(in, s_in, x) -> (out, s_out, y)` on host `h` yields the
/// edges `x -[s_in]-> h` and `h -[s_out]-> y`. When several results map to the
/// same edge the strongest evidence is kept.
pub fn build_graph<'a, I>(per_host: I) -> DependencyGraph
where
    I: IntoIterator<Item = (&'a str, &'a [ChannelPairResult])>,
{
    let mut graph = DependencyGraph::default();
    for (host, results) in per_host {
        for r in results.iter().filter(|r| r.dependent) {
            let evidence = EdgeEvidence {
                q_value: r.q_value,
                n_delays: r.n_delays,
                statistic: r.ks.as_ref().map_or(0.0, |k| k.statistic),
            };
            graph.add_edge(EdgeKey::new(&r.input.remote, host, &r.input.service), evidence);
            graph.add_edge(EdgeKey::new(host, &r.output.remote, &r.output.service), evidence);
        }
    }
    graph
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphDiff {
    pub added: Vec<EdgeKey>,
    pub removed: Vec<EdgeKey>,
}

/// Edge-set differences on `(from, to, service)`; evidence is ignored.
pub fn graph_diff(before: &DependencyGraph, after: &DependencyGraph) -> GraphDiff {
    GraphDiff {
        added: after.edges.keys().filter(|k| !before.edges.contains_key(*k)).cloned().collect(),
        removed: before.edges.keys().filter(|k| !after.edges.contains_key(*k)).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::TestOutcome;
    use crate::trace::ChannelId;

    fn dependent(input: ChannelId, output: ChannelId, q: f64) -> ChannelPairResult {
        ChannelPairResult {
            input,
            output,
            n_delays: 40,
            ks: Some(TestOutcome {
                statistic: 0.6,
                p_value: q / 2.0,
                n_a: 40,
                n_b: 40,
                significant: true,
                practically_significant: None,
            }),
            log_odds: Some(10.0),
            q_value: q,
            dependent: true,
            insufficient_data: false,
        }
    }

    #[test]
    fn empty_input_empty_graph() {
        let g = build_graph(std::iter::empty());
        assert!(g.nodes.is_empty());
        assert!(g.edges.is_empty());
    }

    #[test]
    fn one_pair_three_nodes_two_edges() {
        let results = vec![dependent(ChannelId::input("http", "x"), ChannelId::output("dns", "y"), 0.01)];
        let g = build_graph([("h", results.as_slice())]);
        assert_eq!(g.nodes.iter().collect::<Vec<_>>(), ["h", "x", "y"]);
        let keys: Vec<_> = g.edges.keys().cloned().collect();
        assert_eq!(keys, vec![EdgeKey::new("h", "y", "dns"), EdgeKey::new("x", "h", "http")]);
    }

    #[test]
    fn strongest_evidence_kept_and_idempotent() {
        let weak = vec![dependent(ChannelId::input("http", "x"), ChannelId::output("dns", "y"), 0.04)];
        let strong = vec![dependent(ChannelId::input("smb", "z"), ChannelId::output("dns", "y"), 0.001)];
        let g = build_graph([("h", weak.as_slice()), ("h2", strong.as_slice())]);
        let g_rev = build_graph([("h2", strong.as_slice()), ("h", weak.as_slice())]);
        assert_eq!(g, g_rev);
        let twice = build_graph([("h", weak.as_slice()), ("h", weak.as_slice())]);
        assert_eq!(twice, build_graph([("h", weak.as_slice())]));

        // Same edge reported twice on one host with different strengths.
        let both = vec![
            dependent(ChannelId::input("http", "x"), ChannelId::output("dns", "y"), 0.04),
            dependent(ChannelId::input("smb", "x"), ChannelId::output("dns", "y"), 0.002),
        ];
        let g = build_graph([("h", both.as_slice())]);
        assert_eq!(g.edges[&EdgeKey::new("h", "y", "dns")].q_value, 0.002);
    }

    #[test]
    fn non_dependent_results_ignored() {
        let mut r = dependent(ChannelId::input("http", "x"), ChannelId::output("dns", "y"), 0.3);
        r.dependent = false;
        let results = [r];
        assert!(build_graph([("h", &results[..])]).edges.is_empty());
    }

    #[test]
    fn diff_and_reachability() {
        let results = vec![dependent(ChannelId::input("http", "x"), ChannelId::output("dns", "y"), 0.01)];
        let g = build_graph([("h", results.as_slice())]);
        assert_eq!(graph_diff(&g, &g), GraphDiff::default());

        let mut g2 = g.clone();
        g2.add_edge(EdgeKey::new("y", "z", "ldap"), EdgeEvidence { q_value: 0.01, n_delays: 12, statistic: 0.5 });
        let d = graph_diff(&g, &g2);
        assert_eq!(d.added, vec![EdgeKey::new("y", "z", "ldap")]);
        assert!(d.removed.is_empty());
        assert_eq!(graph_diff(&g2, &g).removed, d.added);

        let reach: Vec<_> = g2.reachable_from("x").into_iter().collect();
        assert_eq!(reach, ["h", "y", "z"]);
        assert!(g2.reachable_from("z").is_empty());
    }
}
