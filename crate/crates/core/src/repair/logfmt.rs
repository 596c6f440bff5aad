use std::collections::BTreeMap;
use std::fmt::Write;

use super::{HealthState, RepairError, RepairLog, RepairRecord, Status, TruthRecord};

/// One line per machine per tick:
/// `tick=<int> machine=<id> state=<Healthy|Failure> action=<action|-> reports=<wd:status;...>`.
pub fn write_log(log: &RepairLog) -> String {
    let mut out = String::new();
    for r in &log.records {
        let action = r.action.map_or("-", |a| a.as_str());
        let reports = if r.reports.is_empty() {
            "-".to_string()
        } else {
            r.reports.iter().map(|(w, s)| format!("{w}:{s}")).collect::<Vec<_>>().join(";")
        };
        let _ = writeln!(
            out,
            "tick={} machine={} state={} action={action} reports={reports}",
            r.tick,
            r.machine,
            r.state.as_str()
        );
    }
    out
}

/// Sidecar keyed like the log: `tick=<int> machine=<id> persistent=<0|1> transient=<0|1>`.
pub fn write_truth(log: &RepairLog) -> Option<String> {
    let truth = log.truth.as_ref()?;
    let mut out = String::new();
    for t in truth {
        let _ = writeln!(
            out,
            "tick={} machine={} persistent={} transient={}",
            t.tick,
            t.machine,
            u8::from(t.persistent),
            u8::from(t.transient)
        );
    }
    Some(out)
}

fn fields<'a>(line: &'a str, lineno: usize, keys: &[&str]) -> Result<Vec<&'a str>, RepairError> {
    let err = |message: String| RepairError::Parse { line: lineno, message };
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != keys.len() {
        return Err(err(format!("expected {} fields, found {}", keys.len(), parts.len())));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(p, k)| match p.split_once('=') {
            Some((key, value)) if key == *k => Ok(value),
            _ => Err(err(format!("expected `{k}=...`, found `{p}`"))),
        })
        .collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a log written by [`write_log`]. Blank and `#` lines are skipped.
/// Each (tick, machine) pair must appear once and ticks must not decrease.
pub fn parse_log(text: &str) -> Result<RepairLog, RepairError> {
    let mut records = Vec::new();
    let mut seen: BTreeMap<(u64, String), usize> = BTreeMap::new();
    for (lineno, line) in content_lines(text) {
        let err = |message: String| RepairError::Parse { line: lineno, message };
        let f = fields(line, lineno, &["tick", "machine", "state", "action", "reports"])?;
        let tick: u64 = f[0].parse().map_err(|_| err(format!("bad tick `{}`", f[0])))?;
        let machine = f[1].to_string();
        if !crate::trace::is_valid_token(&machine) {
            return Err(err(format!("bad machine id `{machine}`")));
        }
        let state: HealthState = f[2].parse().map_err(err)?;
        let action = match f[3] {
            "-" => None,
            a => Some(a.parse().map_err(err)?),
        };
        let reports = match f[4] {
            "-" => Vec::new(),
            list => list
                .split(';')
                .map(|item| {
                    let (w, s) = item.split_once(':').ok_or_else(|| err(format!("bad report `{item}`")))?;
                    let status: Status = s.parse().map_err(err)?;
                    Ok((w.to_string(), status))
                })
                .collect::<Result<Vec<_>, RepairError>>()?,
        };
        if let Some(prev) = records.last().map(|r: &RepairRecord| r.tick) {
            if tick < prev {
                return Err(err(format!("tick {tick} after tick {prev}")));
            }
        }
        if seen.insert((tick, machine.clone()), lineno).is_some() {
            return Err(err(format!("duplicate record for machine {machine} at tick {tick}")));
        }
        records.push(RepairRecord { tick, machine, state, action, reports });
    }
    if records.is_empty() {
        return Err(RepairError::EmptyLog);
    }
    Ok(RepairLog { records, truth: None })
}

pub fn parse_truth(text: &str) -> Result<Vec<TruthRecord>, RepairError> {
    let flag = |v: &str, lineno: usize| match v {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(RepairError::Parse { line: lineno, message: format!("expected 0 or 1, found `{v}`") }),
    };
    content_lines(text)
        .map(|(lineno, line)| {
            let f = fields(line, lineno, &["tick", "machine", "persistent", "transient"])?;
            let tick = f[0]
                .parse()
                .map_err(|_| RepairError::Parse { line: lineno, message: format!("bad tick `{}`", f[0]) })?;
            Ok(TruthRecord {
                tick,
                machine: f[1].to_string(),
                persistent: flag(f[2], lineno)?,
                transient: flag(f[3], lineno)?,
            })
        })
        .collect()
}
