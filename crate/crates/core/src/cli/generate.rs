use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use super::{read_file, sidecar, write_file, CliError, CmdResult, Outcome};
use crate::diagnosis::synth::{planted_data, PlantedSpec};
use crate::trace::{parse_synth_spec, synth_trace, write_ground_truth, write_trace, SynthSpec};

#[derive(Debug, Args)]
pub struct GenTraceArgs {
    /// Generator spec file; the built-in reference host is used when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace output path; planted pairs go to `<out>.truth`.
    #[arg(long)]
    out: PathBuf,
}

pub fn gen_trace(args: GenTraceArgs) -> CmdResult {
    let mut spec = match &args.spec {
        Some(p) => parse_synth_spec(&read_file(p)?).map_err(|e| CliError(format!("{}: {e}", p.display())))?,
        None => SynthSpec::reference(0),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (trace, truth) = synth_trace(&spec).map_err(CliError::new)?;
    let mut header = String::new();
    for line in spec.to_config_string().lines() {
        let _ = writeln!(header, "# {line}");
    }
    write_file(&args.out, &(header.clone() + &write_trace(&trace)))?;
    write_file(&sidecar(&args.out), &(header + &write_ground_truth(&truth)))?;
    out!("{} events on {} channels, {} planted pairs", trace.n_events(), trace.channels.len(), truth.len());
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricsPreset {
    /// 10k epochs, 30 metrics, 3 causes.
    Reference,
    /// 1k epochs, 8 metrics, 2 causes.
    Small,
}

#[derive(Debug, Args)]
pub struct GenMetricsArgs {
    #[arg(long, value_enum, default_value = "reference")]
    preset: MetricsPreset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics CSV path; per-epoch planted causes go to `<out>.truth`.
    #[arg(long)]
    out: PathBuf,
}

pub fn gen_metrics(args: GenMetricsArgs) -> CmdResult {
    let spec = match args.preset {
        MetricsPreset::Reference => PlantedSpec::reference(args.seed),
        MetricsPreset::Small => PlantedSpec { seed: args.seed, ..PlantedSpec::small() },
    };
    let data = planted_data(&spec);
    let ds = &data.dataset;
    let header = format!("# preset={:?} seed={} slo_threshold={}\n", args.preset, spec.seed, spec.slo().threshold)
        .to_lowercase();
    write_file(&args.out, &(header.clone() + &ds.to_csv()))?;
    let mut truth = header + "ts,slo_state,cause,shifted_metrics\n";
    for i in 0..ds.len() {
        let cause = data.causes[i].map_or_else(String::new, |c| c.to_string());
        let shifted: Vec<&str> = data.shifted[i].iter().map(|&m| ds.metric_names[m].as_str()).collect();
        let _ = writeln!(truth, "{},{},{cause},{}", ds.timestamps[i], data.labels[i].as_str(), shifted.join(";"));
    }
    write_file(&sidecar(&args.out), &truth)?;
    out!("{} epochs, {} metrics, slo threshold {} ms", ds.len(), ds.n_metrics(), spec.slo().threshold);
    Ok(Outcome::Success)
}
