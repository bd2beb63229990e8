use std::collections::BTreeSet;
use std::path::Path;

use irspec_core::features::FeatureSpec;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, KbError, Result};

/// One literature record. Field names are the JSONL keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbRecord {
    pub id: String,
    pub material_focus: String,
    pub technique: String,
    pub wavelength_bands: String,
    /// Step abbreviations in application order, e.g. `["SG", "SNV"]`.
    pub best_preprocessing: Vec<String>,
    pub best_feature: FeatureSpec,
    #[serde(default)]
    pub model_architecture: String,
    #[serde(default)]
    pub citation: String,
}

impl KbRecord {
    /// Text that retrieval sees. Method names are deliberately left out.
    pub fn indexed_text(&self) -> String {
        format!("{} {} {}", self.material_focus, self.technique, self.wavelength_bands)
    }
}

pub fn parse_records(text: &str) -> Result<Vec<KbRecord>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: KbRecord = serde_json::from_str(line).map_err(|e| KbError::BadRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if r.id.is_empty() {
            return Err(KbError::BadRecord {
                line: i + 1,
                reason: "empty id".into(),
            });
        }
        if !seen.insert(r.id.clone()) {
            return Err(KbError::DuplicateId(r.id));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn load_records(path: &Path) -> Result<Vec<KbRecord>> {
    parse_records(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

pub fn records_to_jsonl(records: &[KbRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("records serialise"));
        s.push('\n');
    }
    s
}

pub fn save_records(records: &[KbRecord], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_jsonl(records)).map_err(io_err(path))
}
