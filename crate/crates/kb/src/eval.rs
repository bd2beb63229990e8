use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, KbError, Result};
use crate::index::{query, KbIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub query: String,
    pub relevant: BTreeSet<String>,
}

/// `|retrieved ∩ relevant| / top_k` for one query.
pub fn query_precision(idx: &KbIndex, q: &LabeledQuery, top_k: usize) -> Result<f64> {
    if q.relevant.is_empty() {
        return Err(KbError::InvalidParameter(format!(
            "query `{}` has no relevant documents",
            q.query
        )));
    }
    let hits = query(idx, &q.query, top_k)?.hits;
    let found = hits.iter().filter(|h| q.relevant.contains(&h.id)).count();
    Ok(found as f64 / top_k as f64)
}

/// Mean top-k precision over the labelled queries.
pub fn evaluate_retrieval(idx: &KbIndex, queries: &[LabeledQuery], top_k: usize) -> Result<f64> {
    if queries.is_empty() {
        return Err(KbError::InvalidParameter("no queries".into()));
    }
    let mut total = 0.0;
    for q in queries {
        total += query_precision(idx, q, top_k)?;
    }
    Ok(total / queries.len() as f64)
}

pub fn load_queries(path: &Path) -> Result<Vec<LabeledQuery>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| KbError::BadRecord {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn save_queries(queries: &[LabeledQuery], path: &Path) -> Result<()> {
    let mut s = String::new();
    for q in queries {
        s.push_str(&serde_json::to_string(q).expect("queries serialise"));
        s.push('\n');
    }
    std::fs::write(path, s).map_err(io_err(path))
}
