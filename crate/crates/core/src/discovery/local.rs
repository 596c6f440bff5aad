use serde::{Deserialize, Serialize};

use super::{DiscoveryConfig, Method};
use crate::stats::{bh_select, ks_p_value, ks_test, log_odds_dependence, EmpiricalCdf, TestOutcome};
use crate::trace::{delay_samples, virtual_random_delays_in, ChannelId, HostTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPairResult {
    pub input: ChannelId,
    pub output: ChannelId,
    pub n_delays: usize,
    /// Real delays vs virtual-channel delays; `None` when not tested.
    pub ks: Option<TestOutcome>,
    pub log_odds: Option<f64>,
    /// BH-adjusted KS p-value; 1 for untested pairs.
    pub q_value: f64,
    pub dependent: bool,
    /// Too few paired delays (real or virtual) to run a test.
    pub insufficient_data: bool,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finaliser over the combined words
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Tested {
    index: usize,
    outcome: TestOutcome,
    log_odds: f64,
}

/// Tests every input x output channel pair of one host.
///
/// Results come back in (input, output) channel order. Degenerate traces
/// (no channels, or a config that fails validation) yield an empty result.
pub fn local_dependencies(trace: &HostTrace, config: &DiscoveryConfig) -> Vec<ChannelPairResult> {
    let Some((start, end)) = trace.time_bounds() else {
        return Vec::new();
    };
    if config.validate().is_err() {
        return Vec::new();
    }
    let model = config.log_odds_model().expect("validated");

    let mut results = Vec::new();
    let mut tested = Vec::new();
    for input in trace.inputs() {
        for output in trace.outputs() {
            let index = results.len();
            let real = delay_samples(input, output, config.horizon);
            let mut result = ChannelPairResult {
                input: input.id.clone(),
                output: output.id.clone(),
                n_delays: real.len(),
                ks: None,
                log_odds: None,
                q_value: 1.0,
                dependent: false,
                insufficient_data: true,
            };
            if real.len() >= config.min_samples {
                let virtuals: Vec<Vec<f64>> = (0..config.replications)
                    .map(|r| {
                        let seed = mix(config.seed, index as u64, r as u64);
                        virtual_random_delays_in(input, output.len(), start, end, config.horizon, seed)
                    })
                    .collect();
                if virtuals.iter().all(|v| v.len() >= config.min_samples) {
                    let (outcome, log_odds) = test_pair(&real, &virtuals, config, &model);
                    result.ks = Some(outcome.clone());
                    result.log_odds = Some(log_odds);
                    result.insufficient_data = false;
                    tested.push(Tested { index, outcome, log_odds });
                }
            }
            results.push(result);
        }
    }

    let p_values: Vec<f64> = tested.iter().map(|t| t.outcome.p_value).collect();
    let selection = bh_select(&p_values, config.alpha).expect("p-values in range");
    for (i, t) in tested.iter().enumerate() {
        let r = &mut results[t.index];
        r.q_value = selection.q_values[i];
        let ks_dep = selection.is_rejected(i);
        let bf_dep = t.log_odds >= config.log_odds_threshold;
        r.dependent = match config.method {
            Method::Ks => ks_dep,
            Method::LogOdds => bf_dep,
            Method::Both => ks_dep && bf_dep,
        };
    }
    results
}

fn test_pair(
    real: &[f64],
    virtuals: &[Vec<f64>],
    config: &DiscoveryConfig,
    model: &crate::stats::LogOddsModel,
) -> (TestOutcome, f64) {
    let outcome = if virtuals.len() == 1 {
        ks_test(real, &virtuals[0], config.alpha).expect("finite non-empty delays")
    } else {
        let outcomes: Vec<TestOutcome> =
            virtuals.iter().map(|v| ks_test(real, v, config.alpha).expect("finite non-empty delays")).collect();
        let k = outcomes.len() as f64;
        let d = outcomes.iter().map(|o| o.statistic).sum::<f64>() / k;
        let n_b = (outcomes.iter().map(|o| o.n_b).sum::<usize>() as f64 / k).round().max(1.0) as usize;
        let p = ks_p_value(d, real.len(), n_b).expect("averaged statistic in range");
        TestOutcome {
            statistic: d,
            p_value: p,
            n_a: real.len(),
            n_b,
            significant: p <= config.alpha,
            practically_significant: None,
        }
    };

    // Map real delays through the virtual-channel CDF so that independence
    // corresponds to uniform delays on [0, horizon].
    let reference: Vec<f64> = virtuals.concat();
    let cdf = EmpiricalCdf::new(&reference).expect("non-empty virtual delays");
    let transformed: Vec<f64> = real.iter().map(|&d| cdf.eval(d) * config.horizon).collect();
    let log_odds = log_odds_dependence(&transformed, model).expect("transformed delays lie in [0, horizon]");
    (outcome, log_odds)
}
