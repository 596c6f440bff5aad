use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::{echo_line, load_config, to_json, write_file, CliError, CmdResult, Outcome};
use crate::discovery::{
    build_graph, export_graph, local_dependencies, write_pair_table, ChannelPairResult, DependencyGraph,
    DiscoveryConfig, GraphFormat, Method, PAIR_TABLE_HEADER,
};
use crate::num::fmt_f64;
use crate::trace::parse_trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Dot,
    Csv,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// One trace file per host.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// TOML file with discovery settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    min_samples: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    /// Graph output format.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct HostSummary {
    host: String,
    pairs: usize,
    tested: usize,
    dependent: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'static str,
    seed: u64,
    config: &'a DiscoveryConfig,
    hosts: Vec<HostSummary>,
    nodes: usize,
    edges: usize,
    warnings: Vec<String>,
}

pub fn run(args: DiscoverArgs) -> CmdResult {
    let mut config: DiscoveryConfig = load_config(args.config.as_deref())?;
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.horizon {
        config.horizon = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.method {
        config.method = v;
    }
    if let Some(v) = args.min_samples {
        config.min_samples = v;
    }
    if let Some(v) = args.replications {
        config.replications = v;
    }
    config.validate().map_err(CliError)?;

    let mut per_host: BTreeMap<String, Vec<ChannelPairResult>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for path in &args.traces {
        let file = File::open(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        let trace = parse_trace(BufReader::new(file)).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        let results = local_dependencies(&trace, &config);
        if results.iter().all(|r| r.insufficient_data) {
            warnings.push(format!("{}: no testable channel pairs", path.display()));
        }
        if trace.is_empty() {
            continue;
        }
        if per_host.insert(trace.host.clone(), results).is_some() {
            return Err(CliError(format!("host `{}` appears in more than one trace", trace.host)));
        }
    }

    let graph = build_graph(per_host.iter().map(|(h, r)| (h.as_str(), r.as_slice())));
    let echo = echo_line("discover", &config);
    let mut table = format!("# {echo}\n{PAIR_TABLE_HEADER}\n");
    for (host, results) in &per_host {
        write_pair_table(host, results, &mut table);
    }
    write_file(&args.out.join("pairs.csv"), &table)?;
    match args.format {
        OutputFormat::Json => write_file(&args.out.join("graph.json"), &export_graph(&graph, GraphFormat::Json))?,
        OutputFormat::Dot => {
            write_file(&args.out.join("graph.dot"), &format!("// {echo}\n{}", export_graph(&graph, GraphFormat::Dot)))?
        }
        OutputFormat::Csv => write_file(&args.out.join("edges.csv"), &edge_table(&echo, &graph))?,
    }

    let hosts: Vec<HostSummary> = per_host
        .iter()
        .map(|(host, r)| HostSummary {
            host: host.clone(),
            pairs: r.len(),
            tested: r.iter().filter(|x| !x.insufficient_data).count(),
            dependent: r.iter().filter(|x| x.dependent).count(),
        })
        .collect();
    for h in &hosts {
        out!("{}: {} pairs, {} tested, {} dependent", h.host, h.pairs, h.tested, h.dependent);
    }
    out!("graph: {} nodes, {} edges", graph.nodes.len(), graph.edge_count());
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let summary = Summary {
        command: "discover",
        seed: config.seed,
        config: &config,
        hosts,
        nodes: graph.nodes.len(),
        edges: graph.edge_count(),
        warnings: warnings.clone(),
    };
    write_file(&args.out.join("summary.json"), &to_json(&summary))?;
    Ok(if warnings.is_empty() { Outcome::Success } else { Outcome::Warnings })
}

fn edge_table(echo: &str, graph: &DependencyGraph) -> String {
    let mut out = format!("# {echo}\nfrom,to,service,q_value,n_delays,statistic\n");
    for (k, e) in &graph.edges {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k.from,
            k.to,
            k.service,
            fmt_f64(e.q_value),
            e.n_delays,
            fmt_f64(e.statistic)
        ));
    }
    out
}
