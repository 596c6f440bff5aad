use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ChannelSeries;

/// Pairs each output event with the latest input event at or before it and
/// returns the gaps that do not exceed `horizon`.
///
/// At most one delay is produced per output event; outputs with no preceding
/// input, or whose gap exceeds the horizon, are skipped.
pub fn delay_samples(input: &ChannelSeries, output: &ChannelSeries, horizon: f64) -> Vec<f64> {
    pair_delays(input.times(), output.times(), horizon)
}

pub(crate) fn pair_delays(inputs: &[f64], outputs: &[f64], horizon: f64) -> Vec<f64> {
    let mut delays = Vec::with_capacity(outputs.len());
    let mut next = 0usize;
    for &t_out in outputs {
        while next < inputs.len() && inputs[next] <= t_out {
            next += 1;
        }
        if next == 0 {
            continue;
        }
        let gap = t_out - inputs[next - 1];
        if gap <= horizon {
            delays.push(gap);
        }
    }
    delays
}

/// Delays from `input` to a virtual output channel of `n_out` departures drawn
/// uniformly on `(0, duration)`.
pub fn virtual_random_delays(input: &ChannelSeries, n_out: usize, duration: f64, horizon: f64, seed: u64) -> Vec<f64> {
    virtual_random_delays_in(input, n_out, 0.0, duration, horizon, seed)
}

/// As [`virtual_random_delays`], with departures drawn on `(start, end)`.
pub fn virtual_random_delays_in(
    input: &ChannelSeries,
    n_out: usize,
    start: f64,
    end: f64,
    horizon: f64,
    seed: u64,
) -> Vec<f64> {
    if n_out == 0 || end.partial_cmp(&start) != Some(std::cmp::Ordering::Greater) {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut departures: Vec<f64> = (0..n_out).map(|_| rng.random_range(start..end)).collect();
    departures.sort_by(f64::total_cmp);
    pair_delays(input.times(), &departures, horizon)
}
