use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{DiagnosisError, Signature};

/// One catalog line: `{"ts", "attributions", "abnormal", "annotation"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub ts: f64,
    pub attributions: Vec<f64>,
    pub abnormal: Vec<bool>,
    pub annotation: String,
}

impl CatalogEntry {
    pub fn new(signature: &Signature, annotation: impl Into<String>) -> Self {
        Self {
            ts: signature.ts,
            attributions: signature.attributions.clone(),
            abnormal: signature.abnormal.clone(),
            annotation: annotation.into(),
        }
    }

    pub fn signature(&self) -> Signature {
        Signature { ts: self.ts, attributions: self.attributions.clone(), abnormal: self.abnormal.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignatureCatalog {
    pub entries: Vec<CatalogEntry>,
}

impl SignatureCatalog {
    pub fn push(&mut self, signature: &Signature, annotation: impl Into<String>) {
        self.entries.push(CatalogEntry::new(signature, annotation));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Newline-delimited JSON, one entry per line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialise"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson<R: BufRead>(reader: R) -> Result<Self, DiagnosisError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CatalogEntry = serde_json::from_str(&line)
                .map_err(|e| DiagnosisError::Parse { line: i + 1, message: e.to_string() })?;
            if entry.abnormal.len() != entry.attributions.len() {
                return Err(DiagnosisError::Parse {
                    line: i + 1,
                    message: "abnormal and attributions differ in length".into(),
                });
            }
            entries.push(entry);
        }
        Ok(Self { entries })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalHit<'a> {
    /// Position in the catalog.
    pub index: usize,
    pub distance: f64,
    pub entry: &'a CatalogEntry,
}

/// Catalog entries nearest to `query` by L2 distance on attributions.
/// Equal distances keep catalog order.
pub fn retrieve<'a>(
    query: &Signature,
    catalog: &'a SignatureCatalog,
    top_k: usize,
) -> Result<Vec<RetrievalHit<'a>>, DiagnosisError> {
    if catalog.is_empty() {
        return Err(DiagnosisError::EmptyCatalog);
    }
    if top_k == 0 {
        return Err(DiagnosisError::InvalidConfig("top_k must be at least 1".into()));
    }
    let mut hits = Vec::with_capacity(catalog.len());
    for (index, entry) in catalog.entries.iter().enumerate() {
        if entry.attributions.len() != query.attributions.len() {
            return Err(DiagnosisError::DimensionMismatch {
                expected: query.attributions.len(),
                got: entry.attributions.len(),
            });
        }
        let distance =
            entry.attributions.iter().zip(&query.attributions).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        hits.push(RetrievalHit { index, distance, entry });
    }
    hits.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    hits.truncate(top_k);
    Ok(hits)
}
