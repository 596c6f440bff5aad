//! Line format: `ts=<seconds> host=<id> remote=<id> service=<label> dir=<in|out>`.
//!
//! Fields are space separated and appear in that fixed order. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use super::{is_valid_token, ChannelId, ChannelSeries, Direction, HostTrace, PacketRecord, TraceError};

const FIELDS: [&str; 5] = ["ts", "host", "remote", "service", "dir"];

fn parse_line(line_no: usize, line: &str) -> Result<PacketRecord, TraceError> {
    let malformed = |field: &'static str, message: String| TraceError::Malformed { line: line_no, field, message };
    let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
    let mut values = [""; 5];
    for (i, field) in FIELDS.iter().enumerate() {
        let token = tokens.get(i).ok_or_else(|| malformed(field, "missing".into()))?;
        let value = token
            .strip_prefix(field)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| malformed(field, format!("expected `{field}=...`, got `{token}`")))?;
        values[i] = value;
    }
    if tokens.len() > FIELDS.len() {
        return Err(malformed("dir", format!("unexpected trailing token `{}`", tokens[FIELDS.len()])));
    }
    let [ts, host, remote, service, dir] = values;

    let timestamp: f64 = ts.parse().map_err(|_| malformed("ts", format!("not a number: `{ts}`")))?;
    if !timestamp.is_finite() || timestamp < 0.0 {
        return Err(malformed("ts", format!("must be finite and non-negative, got `{ts}`")));
    }
    for (field, value) in [("host", host), ("remote", remote), ("service", service)] {
        if !is_valid_token(value) {
            return Err(malformed(field, format!("`{value}` is not a valid identifier")));
        }
    }
    if host == remote {
        return Err(malformed("remote", format!("remote equals host `{host}`")));
    }
    let direction: Direction = dir.parse().map_err(|e| malformed("dir", e))?;
    Ok(PacketRecord {
        timestamp,
        host: host.to_owned(),
        remote: remote.to_owned(),
        service: service.to_owned(),
        direction,
    })
}

/// Parses one host's trace in a single pass.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<HostTrace, TraceError> {
    let mut host: Option<String> = None;
    let mut grouped: BTreeMap<ChannelId, Vec<f64>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let line_no = i + 1;
        let record = parse_line(line_no, trimmed)?;
        match &host {
            None => host = Some(record.host.clone()),
            Some(h) if *h != record.host => {
                return Err(TraceError::MixedHosts { line: line_no, expected: h.clone(), found: record.host });
            }
            Some(_) => {}
        }
        grouped.entry(record.channel()).or_default().push(record.timestamp);
    }
    Ok(HostTrace::from_channels(
        host.as_deref().unwrap_or_default(),
        grouped.into_iter().map(|(id, times)| ChannelSeries::new(id, times)),
    ))
}

pub fn parse_trace_str(s: &str) -> Result<HostTrace, TraceError> {
    parse_trace(s.as_bytes())
}

/// Renders a trace in time order (ties broken by channel order).
pub fn write_trace(trace: &HostTrace) -> String {
    let mut events: Vec<(f64, &ChannelId)> =
        trace.channels.values().flat_map(|s| s.times().iter().map(move |&t| (t, &s.id))).collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut out = String::with_capacity(events.len() * 64);
    for (t, id) in events {
        let _ = writeln!(
            out,
            "ts={t} host={} remote={} service={} dir={}",
            trace.host, id.remote, id.service, id.direction
        );
    }
    out
}
