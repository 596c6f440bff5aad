use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{DiagnosisError, SloState};

/// Per-epoch metric vectors with the epoch's average response time.
///
/// CSV form: a `ts,art_ms,<metric_1>,...,<metric_k>` header followed by
/// numeric rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricDataset {
    pub metric_names: Vec<String>,
    pub timestamps: Vec<f64>,
    pub art_ms: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl MetricDataset {
    pub fn new(metric_names: Vec<String>) -> Self {
        Self { metric_names, ..Default::default() }
    }

    pub fn push(&mut self, ts: f64, art_ms: f64, metrics: Vec<f64>) {
        debug_assert_eq!(metrics.len(), self.metric_names.len());
        self.timestamps.push(ts);
        self.art_ms.push(art_ms);
        self.rows.push(metrics);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_metrics(&self) -> usize {
        self.metric_names.len()
    }

    /// New dataset holding the listed epochs in the listed order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            metric_names: self.metric_names.clone(),
            timestamps: indices.iter().map(|&i| self.timestamps[i]).collect(),
            art_ms: indices.iter().map(|&i| self.art_ms[i]).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self, DiagnosisError> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let parse_err = |line: usize, message: String| DiagnosisError::Parse { line, message };
        let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if header.len() < 3 || &header[0] != "ts" || &header[1] != "art_ms" {
            return Err(parse_err(1, "header must be `ts,art_ms,<metric_1>,...`".into()));
        }
        let mut ds = Self::new(header.iter().skip(2).map(str::to_owned).collect());
        for (i, record) in rdr.records().enumerate() {
            let fallback = i + 2;
            let record = record.map_err(|e| {
                let line = e.position().map_or(fallback, |p| p.line() as usize);
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(fallback, |p| p.line() as usize);
            if record.len() != header.len() {
                return Err(parse_err(line, format!("expected {} fields, got {}", header.len(), record.len())));
            }
            let mut values = Vec::with_capacity(record.len());
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(line, format!("`{}` is not a number: `{field}`", &header[j])))?;
                values.push(v);
            }
            if !values[0].is_finite() || !values[1].is_finite() {
                return Err(parse_err(line, "ts and art_ms must be finite".into()));
            }
            if ds.timestamps.last().is_some_and(|&prev| values[0] < prev) {
                return Err(parse_err(line, "timestamps must be non-decreasing".into()));
            }
            let metrics = values.split_off(2);
            ds.push(values[0], values[1], metrics);
        }
        Ok(ds)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ts,art_ms");
        for name in &self.metric_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{},{}", self.timestamps[i], self.art_ms[i]);
            for v in &self.rows[i] {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SloConfig {
    /// Response-time threshold in milliseconds.
    pub threshold: f64,
}

/// An epoch violates the SLO when its ART is strictly above the threshold.
pub fn label_slo(dataset: &MetricDataset, config: &SloConfig) -> Vec<SloState> {
    dataset
        .art_ms
        .iter()
        .map(|&art| if art > config.threshold { SloState::Violation } else { SloState::Compliant })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(arts: &[f64]) -> MetricDataset {
        let mut ds = MetricDataset::new(vec!["cpu".into()]);
        for (i, &a) in arts.iter().enumerate() {
            ds.push(i as f64, a, vec![0.0]);
        }
        ds
    }

    #[test]
    fn labels_follow_strict_threshold() {
        let cfg = SloConfig { threshold: 200.0 };
        assert_eq!(label_slo(&toy(&[100.0, 300.0]), &cfg), vec![SloState::Compliant, SloState::Violation]);
        assert_eq!(label_slo(&toy(&[200.0]), &cfg), vec![SloState::Compliant]);
        assert!(label_slo(&toy(&[1.0, 2.0, 199.9]), &cfg).iter().all(|l| !l.is_violation()));
    }

    #[test]
    fn csv_round_trip() {
        let text = "ts,art_ms,cpu,mem\n0,120.5,0.25,3\n60,250,0.75,-1.5\n";
        let ds = MetricDataset::from_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.metric_names, vec!["cpu", "mem"]);
        assert_eq!(ds.rows[1], vec![0.75, -1.5]);
        assert_eq!(ds.to_csv(), text);
    }

    #[test]
    fn csv_errors() {
        assert!(MetricDataset::from_csv("time,art_ms,cpu\n".as_bytes()).is_err());
        assert!(MetricDataset::from_csv("ts,art_ms\n".as_bytes()).is_err());
        let err = MetricDataset::from_csv("ts,art_ms,cpu\n0,1,2\n1,2,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DiagnosisError::Parse { line: 3, .. }), "{err}");
        assert!(MetricDataset::from_csv("ts,art_ms,cpu\n5,1,2\n1,2,3\n".as_bytes()).is_err());
        assert!(MetricDataset::from_csv("ts,art_ms,cpu\n0,1\n".as_bytes()).is_err());
    }
}
