use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{echo_line, load_config, read_file, to_json, write_file, CliError, CmdResult, Outcome};
use crate::diagnosis::{
    classify, cluster_signatures, fit_classifier, label_slo, retrieve, select_features, signature, DiagnosisModel,
    MetricDataset, SelectionConfig, Signature, SignatureCatalog, SloConfig, SloState,
};
use crate::num::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Action {
    /// Select features and fit the classifier.
    Train,
    /// Also derive a signature for every violation epoch.
    Signatures,
    /// Also cluster the signatures and write the annotated timeline.
    Cluster,
    /// Match each violation signature against an annotated catalog.
    Retrieve,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Metrics CSV (`ts,art_ms,<metric>,...`).
    #[arg(long)]
    metrics: PathBuf,
    /// SLO threshold on average response time, milliseconds.
    #[arg(long)]
    slo: Option<f64>,
    #[arg(long, value_enum)]
    action: Action,
    /// TOML file with diagnosis settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of clusters.
    #[arg(long)]
    k: Option<usize>,
    /// Catalog (NDJSON) to search with `--action retrieve`.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    max_features: Option<usize>,
    /// Significance level for adding a feature.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DiagnoseConfig {
    slo_threshold: Option<f64>,
    k: usize,
    top_k: usize,
    seed: u64,
    selection: SelectionConfig,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self { slo_threshold: None, k: 3, top_k: 3, seed: 0, selection: SelectionConfig::default() }
    }
}

#[derive(Serialize)]
struct TrainingFit {
    epochs: usize,
    violations: usize,
    accuracy: f64,
    balanced_accuracy: f64,
}

#[derive(Serialize)]
struct ModelReport<'a> {
    command: &'static str,
    action: String,
    seed: u64,
    config: &'a DiagnoseConfig,
    selected_metrics: Vec<&'a str>,
    training_fit: TrainingFit,
    model: &'a DiagnosisModel,
}

pub fn run(args: DiagnoseArgs) -> CmdResult {
    let mut config: DiagnoseConfig = load_config(args.config.as_deref())?;
    if args.slo.is_some() {
        config.slo_threshold = args.slo;
    }
    if let Some(v) = args.k {
        config.k = v;
    }
    if let Some(v) = args.top_k {
        config.top_k = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.max_features {
        config.selection.max_features = v;
    }
    if let Some(v) = args.alpha {
        config.selection.alpha = v;
    }
    let threshold = config.slo_threshold.ok_or_else(|| CliError::new("an SLO threshold is required (--slo)"))?;
    if !threshold.is_finite() {
        return Err(CliError::new("SLO threshold must be finite"));
    }
    let catalog = match (args.action, &args.catalog) {
        (Action::Retrieve, None) => return Err(CliError::new("--action retrieve needs --catalog")),
        (Action::Retrieve, Some(p)) => {
            let file = File::open(p).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
            let catalog = SignatureCatalog::from_ndjson(BufReader::new(file))
                .map_err(|e| CliError(format!("{}: {e}", p.display())))?;
            if catalog.is_empty() {
                return Err(CliError(format!("{}: catalog is empty", p.display())));
            }
            Some(catalog)
        }
        _ => None,
    };

    let text = read_file(&args.metrics)?;
    let ds =
        MetricDataset::from_csv(text.as_bytes()).map_err(|e| CliError(format!("{}: {e}", args.metrics.display())))?;
    let labels = label_slo(&ds, &SloConfig { threshold });
    let features = select_features(&ds, &labels, &config.selection).map_err(CliError::new)?;
    let model = fit_classifier(&ds, &labels, &features).map_err(CliError::new)?;

    let action = format!("{:?}", args.action).to_lowercase();
    let echo = echo_line(&format!("diagnose {action}"), &config);
    let report = ModelReport {
        command: "diagnose",
        action: action.clone(),
        seed: config.seed,
        config: &config,
        selected_metrics: features.iter().map(|&f| ds.metric_names[f].as_str()).collect(),
        training_fit: training_fit(&model, &ds, &labels)?,
        model: &model,
    };
    write_file(&args.out.join("model.json"), &to_json(&report))?;
    out!("selected {} of {} metrics: {}", features.len(), ds.n_metrics(), report.selected_metrics.join(", "));
    out!("training balanced accuracy {:.4}", report.training_fit.balanced_accuracy);
    if args.action == Action::Train {
        return Ok(Outcome::Success);
    }

    let violations: Vec<usize> = (0..ds.len()).filter(|&i| labels[i].is_violation()).collect();
    let signatures: Vec<Signature> = violations
        .iter()
        .map(|&i| signature(&model, &ds.rows[i], ds.timestamps[i]))
        .collect::<Result<_, _>>()
        .map_err(CliError::new)?;

    match args.action {
        Action::Train => unreachable!(),
        Action::Signatures => {
            let mut catalog = SignatureCatalog::default();
            for s in &signatures {
                catalog.push(s, "");
            }
            write_file(&args.out.join("signatures.ndjson"), &catalog.to_ndjson())?;
            out!("{} violation signatures", signatures.len());
        }
        Action::Cluster => {
            let assignment = cluster_signatures(&signatures, config.k, config.seed).map_err(CliError::new)?;
            let mut catalog = SignatureCatalog::default();
            for (s, c) in signatures.iter().zip(&assignment) {
                catalog.push(s, format!("cluster-{c}"));
            }
            write_file(&args.out.join("catalog.ndjson"), &catalog.to_ndjson())?;
            let mut timeline = format!("# {echo}\nts,art_ms,slo_state,cluster_id\n");
            let mut cluster_of = vec![None; ds.len()];
            for (&i, &c) in violations.iter().zip(&assignment) {
                cluster_of[i] = Some(c);
            }
            for i in 0..ds.len() {
                let c = cluster_of[i].map_or_else(String::new, |c| c.to_string());
                let _ = writeln!(timeline, "{},{},{},{c}", ds.timestamps[i], ds.art_ms[i], labels[i].as_str());
            }
            write_file(&args.out.join("timeline.csv"), &timeline)?;
            let mut sizes = vec![0usize; config.k];
            for &c in &assignment {
                sizes[c] += 1;
            }
            out!("{} violation signatures in clusters of sizes {sizes:?}", signatures.len());
        }
        Action::Retrieve => {
            let catalog = catalog.expect("loaded above");
            let mut w = csv::Writer::from_writer(format!("# {echo}\n").into_bytes());
            w.write_record(["ts", "rank", "catalog_index", "catalog_ts", "distance", "annotation"])
                .map_err(CliError::new)?;
            for s in &signatures {
                let hits = retrieve(s, &catalog, config.top_k).map_err(CliError::new)?;
                for (rank, h) in hits.iter().enumerate() {
                    w.write_record([
                        s.ts.to_string(),
                        (rank + 1).to_string(),
                        h.index.to_string(),
                        h.entry.ts.to_string(),
                        fmt_f64(h.distance),
                        h.entry.annotation.clone(),
                    ])
                    .map_err(CliError::new)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| CliError::new(e.error()))?;
            write_file(&args.out.join("retrieval.csv"), &String::from_utf8(bytes).expect("utf-8 fields"))?;
            out!("retrieved top {} matches for {} violation signatures", config.top_k, signatures.len());
        }
    }
    Ok(Outcome::Success)
}

fn training_fit(model: &DiagnosisModel, ds: &MetricDataset, labels: &[SloState]) -> Result<TrainingFit, CliError> {
    let mut hits = [0usize; 2];
    let mut totals = [0usize; 2];
    for (row, &label) in ds.rows.iter().zip(labels) {
        let k = usize::from(label.is_violation());
        totals[k] += 1;
        hits[k] += usize::from(classify(model, row).map_err(CliError::new)?.class == label);
    }
    let recall = |k: usize| hits[k] as f64 / totals[k] as f64;
    Ok(TrainingFit {
        epochs: ds.len(),
        violations: totals[1],
        accuracy: (hits[0] + hits[1]) as f64 / ds.len() as f64,
        balanced_accuracy: (recall(0) + recall(1)) / 2.0,
    })
}
