//! Packet-header traces, grouped into per-host directional service channels.
//!
//! A channel is every packet a host exchanged in one direction, for one
//! service label, with one remote endpoint. Dependency tests operate on the
//! delays between an input channel and an output channel of the same host.

mod delay;
mod format;
mod synth;

pub use delay::{delay_samples, virtual_random_delays, virtual_random_delays_in};
pub use format::{parse_trace, parse_trace_str, write_trace};
pub use synth::{parse_ground_truth, parse_synth_spec, synth_trace, write_ground_truth, PlantedDependency, SynthSpec};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: field `{field}`: {message}")]
    Malformed { line: usize, field: &'static str, message: String },
    #[error("line {line}: host `{found}` differs from `{expected}` seen earlier in the file")]
    MixedHosts { line: usize, expected: String, found: String },
    #[error("invalid channel id `{0}` (expected <in|out>/<service>/<remote>)")]
    BadChannelId(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            other => Err(format!("expected `in` or `out`, got `{other}`")),
        }
    }
}

/// Identifiers and labels are restricted to `[A-Za-z0-9._-]+`.
pub fn is_valid_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
}

/// One packet header as seen from `host`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub timestamp: f64,
    pub host: String,
    pub remote: String,
    pub service: String,
    pub direction: Direction,
}

impl PacketRecord {
    pub fn channel(&self) -> ChannelId {
        ChannelId::new(self.direction, &self.service, &self.remote)
    }
}

/// `(direction, service, remote)`; written as `in/http/x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId {
    pub direction: Direction,
    pub service: String,
    pub remote: String,
}

impl ChannelId {
    pub fn new(direction: Direction, service: &str, remote: &str) -> Self {
        Self { direction, service: service.to_owned(), remote: remote.to_owned() }
    }

    pub fn input(service: &str, remote: &str) -> Self {
        Self::new(Direction::In, service, remote)
    }

    pub fn output(service: &str, remote: &str) -> Self {
        Self::new(Direction::Out, service, remote)
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.direction, self.service, self.remote)
    }
}

impl FromStr for ChannelId {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TraceError::BadChannelId(s.to_owned());
        let mut parts = s.split('/');
        let (Some(dir), Some(service), Some(remote), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let direction = dir.parse().map_err(|_| bad())?;
        if !is_valid_token(service) || !is_valid_token(remote) {
            return Err(bad());
        }
        Ok(Self::new(direction, service, remote))
    }
}

/// Event times of one channel, strictly ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub id: ChannelId,
    times: Vec<f64>,
}

impl ChannelSeries {
    /// Sorts `times` and coalesces exact duplicates.
    pub fn new(id: ChannelId, mut times: Vec<f64>) -> Self {
        times.sort_by(f64::total_cmp);
        times.dedup();
        Self { id, times }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Everything one host sent and received, grouped by channel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HostTrace {
    /// Empty when the trace holds no records.
    pub host: String,
    pub channels: BTreeMap<ChannelId, ChannelSeries>,
}

impl HostTrace {
    pub fn from_channels(host: &str, channels: impl IntoIterator<Item = ChannelSeries>) -> Self {
        let channels = channels.into_iter().filter(|s| !s.is_empty()).map(|s| (s.id.clone(), s)).collect();
        Self { host: host.to_owned(), channels }
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn inputs(&self) -> impl Iterator<Item = &ChannelSeries> {
        self.channels.values().filter(|s| s.id.direction == Direction::In)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &ChannelSeries> {
        self.channels.values().filter(|s| s.id.direction == Direction::Out)
    }

    pub fn n_events(&self) -> usize {
        self.channels.values().map(ChannelSeries::len).sum()
    }

    /// `(first, last)` event time, `None` for an empty trace.
    pub fn time_bounds(&self) -> Option<(f64, f64)> {
        let first = self.channels.values().filter_map(|s| s.times.first()).copied().reduce(f64::min)?;
        let last = self.channels.values().filter_map(|s| s.times.last()).copied().reduce(f64::max)?;
        Some((first, last))
    }

    /// `last - first`; zero with fewer than two events.
    pub fn duration(&self) -> f64 {
        self.time_bounds().map_or(0.0, |(a, b)| b - a)
    }
}
