//! Ground-truth trace generator.
//!
//! Spec files use the same `key=value` token syntax as traces:
//!
//! ```text
//! host=desktop duration=1000 seed=7
//! channel=in/http/x rate=1.0
//! channel=out/dns/y rate=0.5
//! dep=in/http/x->out/dns/y mean=0.05 prob=0.9
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{is_valid_token, ChannelId, ChannelSeries, Direction, HostTrace, TraceError};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDependency {
    pub input: ChannelId,
    pub output: ChannelId,
    /// Mean of the exponential response delay, seconds.
    pub mean_delay: f64,
    /// Chance that an input event triggers a response.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub host: String,
    pub duration: f64,
    /// Background Poisson rate per second for each channel.
    pub channels: Vec<(ChannelId, f64)>,
    pub dependencies: Vec<PlantedDependency>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self { host: "host".into(), duration: 0.0, channels: Vec::new(), dependencies: Vec::new(), seed: 0 }
    }
}

impl SynthSpec {
    /// Host `server` with `n_inputs` inputs (`in/svc<i>/client<i>`, rate 1/s) and
    /// `n_outputs` outputs (`out/be<j>/backend<j>`). Input `i` drives output `i`
    /// for `i < n_deps` with probability 0.9 and mean delay 0.05 s. Outputs
    /// carry Poisson background at `output_rate`, or none when it is `None`.
    pub fn planted(
        n_inputs: usize,
        n_outputs: usize,
        n_deps: usize,
        duration: f64,
        output_rate: Option<f64>,
        seed: u64,
    ) -> Self {
        let inputs: Vec<ChannelId> =
            (0..n_inputs).map(|i| ChannelId::input(&format!("svc{i}"), &format!("client{i}"))).collect();
        let outputs: Vec<ChannelId> =
            (0..n_outputs).map(|j| ChannelId::output(&format!("be{j}"), &format!("backend{j}"))).collect();
        let mut channels: Vec<(ChannelId, f64)> = inputs.iter().map(|c| (c.clone(), 1.0)).collect();
        if let Some(rate) = output_rate {
            channels.extend(outputs.iter().map(|c| (c.clone(), rate)));
        }
        let dependencies = (0..n_deps.min(n_inputs).min(n_outputs))
            .map(|i| PlantedDependency {
                input: inputs[i].clone(),
                output: outputs[i].clone(),
                mean_delay: 0.05,
                probability: 0.9,
            })
            .collect();
        Self { host: "server".into(), duration, channels, dependencies, seed }
    }

    /// 10 inputs, 11 outputs (110 pairs), 10 planted dependencies, 1200 s.
    pub fn reference(seed: u64) -> Self {
        Self::planted(10, 11, 10, 1200.0, Some(0.5), seed)
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let invalid = |m: String| Err(TraceError::InvalidSpec(m));
        if !is_valid_token(&self.host) {
            return invalid(format!("host `{}` is not a valid identifier", self.host));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return invalid(format!("duration must be finite and non-negative, got {}", self.duration));
        }
        let mut declared = BTreeSet::new();
        for (id, rate) in &self.channels {
            if !(*rate > 0.0 && rate.is_finite()) {
                return invalid(format!("channel {id}: rate must be positive, got {rate}"));
            }
            if id.remote == self.host {
                return invalid(format!("channel {id}: remote equals host"));
            }
            if !declared.insert(id) {
                return invalid(format!("channel {id} declared twice"));
            }
        }
        for dep in &self.dependencies {
            if dep.input.direction != Direction::In || dep.output.direction != Direction::Out {
                return invalid(format!(
                    "dependency {}->{} must go from an in channel to an out channel",
                    dep.input, dep.output
                ));
            }
            if !declared.contains(&dep.input) {
                return invalid(format!("dependency input {} is not a declared channel", dep.input));
            }
            if dep.output.remote == self.host {
                return invalid(format!("channel {}: remote equals host", dep.output));
            }
            if !(dep.mean_delay > 0.0 && dep.mean_delay.is_finite()) {
                return invalid(format!("dependency mean delay must be positive, got {}", dep.mean_delay));
            }
            if !(dep.probability > 0.0 && dep.probability <= 1.0) {
                return invalid(format!("dependency probability must lie in (0, 1], got {}", dep.probability));
            }
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let mut out = format!("host={} duration={} seed={}\n", self.host, self.duration, self.seed);
        for (id, rate) in &self.channels {
            let _ = writeln!(out, "channel={id} rate={rate}");
        }
        for d in &self.dependencies {
            let _ = writeln!(out, "dep={}->{} mean={} prob={}", d.input, d.output, d.mean_delay, d.probability);
        }
        out
    }
}

fn spec_err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::InvalidSpec(format!("line {line}: {}", message.into()))
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, TraceError> {
    value.parse().map_err(|_| spec_err(line, format!("`{key}` is not a number: `{value}`")))
}

fn take<'a>(line: usize, pairs: &mut BTreeMap<&str, &'a str>, key: &str) -> Result<&'a str, TraceError> {
    pairs.remove(key).ok_or_else(|| spec_err(line, format!("missing `{key}`")))
}

/// Parses the spec file format shown in the module docs.
pub fn parse_synth_spec(text: &str) -> Result<SynthSpec, TraceError> {
    let mut spec = SynthSpec::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut pairs = BTreeMap::new();
        let mut first = None;
        for token in trimmed.split_ascii_whitespace() {
            let (k, v) =
                token.split_once('=').ok_or_else(|| spec_err(line, format!("expected key=value, got `{token}`")))?;
            first.get_or_insert(k);
            if pairs.insert(k, v).is_some() {
                return Err(spec_err(line, format!("duplicate key `{k}`")));
            }
        }
        match first {
            Some("channel") => {
                let id: ChannelId = take(line, &mut pairs, "channel")?
                    .parse()
                    .map_err(|e: TraceError| spec_err(line, e.to_string()))?;
                let rate = parse_num(line, "rate", take(line, &mut pairs, "rate")?)?;
                spec.channels.push((id, rate));
            }
            Some("dep") => {
                let edge = take(line, &mut pairs, "dep")?;
                let (a, b) = edge.split_once("->").ok_or_else(|| spec_err(line, "dep must be `<input>-><output>`"))?;
                let input = a.parse().map_err(|e: TraceError| spec_err(line, e.to_string()))?;
                let output = b.parse().map_err(|e: TraceError| spec_err(line, e.to_string()))?;
                let mean_delay = parse_num(line, "mean", take(line, &mut pairs, "mean")?)?;
                let probability = parse_num(line, "prob", take(line, &mut pairs, "prob")?)?;
                spec.dependencies.push(PlantedDependency { input, output, mean_delay, probability });
            }
            _ => {
                for key in ["host", "duration", "seed"] {
                    if let Some(v) = pairs.remove(key) {
                        match key {
                            "host" => spec.host = v.to_owned(),
                            "duration" => spec.duration = parse_num(line, key, v)?,
                            _ => spec.seed = parse_num(line, key, v)?,
                        }
                    }
                }
            }
        }
        if let Some(k) = pairs.keys().next() {
            return Err(spec_err(line, format!("unknown key `{k}`")));
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn poisson_times(rng: &mut ChaCha8Rng, rate: f64, duration: f64) -> Vec<f64> {
    let gap = Exp::new(rate).expect("validated rate");
    let mut times = Vec::with_capacity((rate * duration * 1.1) as usize + 4);
    let mut t = 0.0;
    loop {
        t += gap.sample(rng);
        if t > duration {
            return times;
        }
        times.push(t);
    }
}

/// Generates a trace with Poisson background traffic and planted
/// input-to-output responses, plus the set of planted `(input, output)` pairs.
///
/// Responses are triggered by the input channel's background events only, so
/// planted dependencies do not chain. Events falling after `duration` are dropped.
pub fn synth_trace(spec: &SynthSpec) -> Result<(HostTrace, Vec<(ChannelId, ChannelId)>), TraceError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut events: BTreeMap<ChannelId, Vec<f64>> = BTreeMap::new();
    let mut background: BTreeMap<&ChannelId, Vec<f64>> = BTreeMap::new();
    for (id, rate) in &spec.channels {
        let times = poisson_times(&mut rng, *rate, spec.duration);
        events.entry(id.clone()).or_default().extend(&times);
        background.insert(id, times);
    }
    let mut truth = BTreeSet::new();
    for dep in &spec.dependencies {
        let delay = Exp::new(1.0 / dep.mean_delay).expect("validated mean");
        let responses: Vec<f64> = background[&dep.input]
            .iter()
            .filter_map(|&t| {
                let fires = rng.random::<f64>() < dep.probability;
                let at = t + delay.sample(&mut rng);
                (fires && at <= spec.duration).then_some(at)
            })
            .collect();
        events.entry(dep.output.clone()).or_default().extend(responses);
        truth.insert((dep.input.clone(), dep.output.clone()));
    }
    let trace = HostTrace::from_channels(&spec.host, events.into_iter().map(|(id, t)| ChannelSeries::new(id, t)));
    Ok((trace, truth.into_iter().collect()))
}

/// Sidecar format: one `input=<channel> output=<channel>` line per planted pair.
pub fn write_ground_truth(pairs: &[(ChannelId, ChannelId)]) -> String {
    pairs.iter().map(|(a, b)| format!("input={a} output={b}\n")).collect()
}

pub fn parse_ground_truth(text: &str) -> Result<Vec<(ChannelId, ChannelId)>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let mut tokens = l.split_ascii_whitespace();
            let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
                return Err(spec_err(i + 1, "expected `input=<channel> output=<channel>`"));
            };
            let a = a.strip_prefix("input=").ok_or_else(|| spec_err(i + 1, "missing `input=`"))?;
            let b = b.strip_prefix("output=").ok_or_else(|| spec_err(i + 1, "missing `output=`"))?;
            Ok((a.parse()?, b.parse()?))
        })
        .collect()
}
