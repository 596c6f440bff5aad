use std::io::Read;

use clap::Subcommand;

use super::{CliError, CmdResult, Outcome};
use crate::diagnosis::mcnemar_exact;
use crate::num::fmt_f64;
use crate::stats::{
    bh_select, calibrate_p_value, expected_false_positives, expected_false_proportion, ks_test, log_odds_dependence,
    permutation_p_value, LogOddsModel,
};

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Benjamini-Hochberg selection over p-values read from stdin.
    Bh {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Two-sample KS test; stdin holds sample A on the first line, B on the second.
    Ks {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Also compute a permutation p-value with this many shuffles.
        #[arg(long)]
        permutations: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expected false positives among `tests` at per-test level `level`.
    Fdr {
        #[arg(long)]
        tests: usize,
        #[arg(long)]
        level: f64,
        /// Number of rejections, to report the expected false proportion.
        #[arg(long)]
        rejections: Option<usize>,
    },
    /// Lower bound on the posterior probability of the null for each p-value on stdin.
    Calibrate,
    /// Exact McNemar test on the discordant counts.
    Mcnemar {
        #[arg(long)]
        n01: usize,
        #[arg(long)]
        n10: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Log Bayes factor for dependence over the delays on stdin.
    LogOdds {
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 1.0)]
        dirichlet_alpha: f64,
    },
}

fn parse_numbers(line: &str, what: &str) -> Result<Vec<f64>, CliError> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError(format!("{what}: `{t}` is not a number"))))
        .collect()
}

fn stdin_text() -> Result<String, CliError> {
    let mut text = String::new();
    std::io::stdin().read_to_string(&mut text).map_err(CliError::new)?;
    Ok(text)
}

pub fn run(command: StatsCommand) -> CmdResult {
    match command {
        StatsCommand::Bh { alpha } => {
            let p = parse_numbers(&stdin_text()?, "p-values")?;
            let set = bh_select(&p, alpha).map_err(CliError::new)?;
            out!("# m={} alpha={alpha} threshold={} rejected={}", set.m, set.threshold, set.n_rejected());
            out!("index,p_value,q_value,rejected");
            for (i, (pv, q)) in p.iter().zip(&set.q_values).enumerate() {
                out!("{i},{},{},{}", fmt_f64(*pv), fmt_f64(*q), set.is_rejected(i));
            }
        }
        StatsCommand::Ks { alpha, permutations, seed } => {
            let text = stdin_text()?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            let a = parse_numbers(lines.next().unwrap_or_default(), "sample A")?;
            let b = parse_numbers(lines.next().unwrap_or_default(), "sample B")?;
            let t = ks_test(&a, &b, alpha).map_err(CliError::new)?;
            out!("statistic={}", t.statistic);
            out!("p_value={}", fmt_f64(t.p_value));
            out!("n_a={} n_b={}", t.n_a, t.n_b);
            out!("significant={}", t.significant);
            if let Some(n) = permutations {
                let p = permutation_p_value(&a, &b, n, seed).map_err(CliError::new)?;
                out!("permutation_p_value={p} permutations={n} seed={seed}");
            }
        }
        StatsCommand::Fdr { tests, level, rejections } => {
            if !(0.0..=1.0).contains(&level) {
                return Err(CliError(format!("level must lie in [0, 1], got {level}")));
            }
            out!("tests={tests} level={level}");
            out!("expected_false_positives={}", expected_false_positives(tests, level));
            if let Some(r) = rejections {
                match expected_false_proportion(tests, level, r) {
                    Some(v) => out!("rejections={r} expected_false_proportion={v}"),
                    None => out!("rejections={r} expected_false_proportion=undefined"),
                }
            }
        }
        StatsCommand::Calibrate => {
            for p in parse_numbers(&stdin_text()?, "p-values")? {
                out!("{p},{}", calibrate_p_value(p).map_err(CliError::new)?);
            }
        }
        StatsCommand::Mcnemar { n01, n10, alpha } => {
            let p = mcnemar_exact(n01, n10);
            out!("n01={n01} n10={n10} p_value={} significant={}", fmt_f64(p), p < alpha);
        }
        StatsCommand::LogOdds { horizon, bins, dirichlet_alpha } => {
            let model = LogOddsModel::new(horizon, bins, dirichlet_alpha).map_err(CliError::new)?;
            let delays = parse_numbers(&stdin_text()?, "delays")?;
            out!("log_bayes_factor={}", log_odds_dependence(&delays, &model).map_err(CliError::new)?);
        }
    }
    Ok(Outcome::Success)
}
