use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, KbError, Result};
use crate::record::KbRecord;
use crate::tokenize::tokenize;

pub const BM25_K1: f64 = 1.5;
pub const BM25_B: f64 = 0.75;
pub const DEFAULT_TOP_K: usize = 3;
pub const CACHE_MAGIC: &[u8; 4] = b"SKB1";
pub const CACHE_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    BoW,
    BM25,
    TFIDF,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::BoW, Engine::BM25, Engine::TFIDF];

    pub fn name(self) -> &'static str {
        match self {
            Engine::BoW => "bow",
            Engine::BM25 => "bm25",
            Engine::TFIDF => "tfidf",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bow" | "bagofwords" => Ok(Engine::BoW),
            "bm25" | "okapi" => Ok(Engine::BM25),
            "tfidf" => Ok(Engine::TFIDF),
            _ => Err(KbError::InvalidParameter(format!(
                "unknown engine `{s}` (bow, bm25, tfidf)"
            ))),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Term statistics for one engine over a fixed record list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbIndex {
    pub engine: Engine,
    pub ids: Vec<String>,
    /// Sorted; a term's position is its id.
    pub vocabulary: Vec<String>,
    /// Per document `(term id, count)` sorted by term id.
    pub term_freqs: Vec<Vec<(u32, u32)>>,
    pub doc_freqs: Vec<u32>,
    pub doc_lengths: Vec<u32>,
    pub avg_doc_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub id: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub hits: Vec<RetrievalHit>,
    /// No query token occurs in the vocabulary.
    pub empty_query: bool,
}

pub fn build_index(records: &[KbRecord], engine: Engine) -> Result<KbIndex> {
    if records.is_empty() {
        return Err(KbError::EmptyCorpus);
    }
    let docs: Vec<Vec<String>> = records.iter().map(|r| tokenize(&r.indexed_text())).collect();
    let mut vocab: Vec<String> = docs.iter().flatten().cloned().collect();
    vocab.sort();
    vocab.dedup();
    let term_id: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i as u32)).collect();

    let mut doc_freqs = vec![0u32; vocab.len()];
    let mut term_freqs = Vec::with_capacity(docs.len());
    for d in &docs {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for t in d {
            *counts.entry(term_id[t.as_str()]).or_default() += 1;
        }
        for &t in counts.keys() {
            doc_freqs[t as usize] += 1;
        }
        term_freqs.push(counts.into_iter().collect::<Vec<_>>());
    }
    let doc_lengths: Vec<u32> = docs.iter().map(|d| d.len() as u32).collect();
    let total: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
    // an all-empty corpus still needs a positive average length
    let avg_doc_length = (total as f64 / docs.len() as f64).max(1.0);
    Ok(KbIndex {
        engine,
        ids: records.iter().map(|r| r.id.clone()).collect(),
        vocabulary: vocab,
        term_freqs,
        doc_freqs,
        doc_lengths,
        avg_doc_length,
    })
}

impl KbIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn term(&self, t: &str) -> Option<u32> {
        self.vocabulary
            .binary_search_by(|v| v.as_str().cmp(t))
            .ok()
            .map(|i| i as u32)
    }

    fn df(&self, term: Option<u32>) -> f64 {
        term.map_or(0.0, |t| self.doc_freqs[t as usize] as f64)
    }

    fn tfidf_idf(&self, term: Option<u32>) -> f64 {
        let n = self.len() as f64;
        ((n + 1.0) / (self.df(term) + 1.0)).ln() + 1.0
    }

    fn bm25_idf(&self, term: u32) -> f64 {
        let n = self.len() as f64;
        let df = self.df(Some(term));
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// Relevance of every document to the tokenised query.
    pub fn scores(&self, tokens: &[String]) -> Vec<f64> {
        let mut q: BTreeMap<&str, f64> = BTreeMap::new();
        for t in tokens {
            *q.entry(t.as_str()).or_default() += 1.0;
        }
        let q: Vec<(Option<u32>, f64)> = q.into_iter().map(|(t, c)| (self.term(t), c)).collect();
        match self.engine {
            Engine::BoW => self.cosine(&q, |_| 1.0),
            Engine::TFIDF => self.cosine(&q, |t| self.tfidf_idf(t)),
            Engine::BM25 => self.bm25(&q),
        }
    }

    fn cosine(&self, q: &[(Option<u32>, f64)], weight: impl Fn(Option<u32>) -> f64) -> Vec<f64> {
        let q_norm = q.iter().map(|&(t, c)| (c * weight(t)).powi(2)).sum::<f64>().sqrt();
        self.term_freqs
            .iter()
            .map(|doc| {
                let d_norm = doc
                    .iter()
                    .map(|&(t, c)| (c as f64 * weight(Some(t))).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if d_norm == 0.0 || q_norm == 0.0 {
                    return 0.0;
                }
                let dot: f64 = q
                    .iter()
                    .filter_map(|&(t, qc)| {
                        let t = t?;
                        let i = doc.binary_search_by_key(&t, |&(id, _)| id).ok()?;
                        let w = weight(Some(t));
                        Some(qc * w * doc[i].1 as f64 * w)
                    })
                    .sum();
                dot / (q_norm * d_norm)
            })
            .collect()
    }

    // query tokens count with multiplicity
    fn bm25(&self, q: &[(Option<u32>, f64)]) -> Vec<f64> {
        self.term_freqs
            .iter()
            .zip(&self.doc_lengths)
            .map(|(doc, &len)| {
                let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * len as f64 / self.avg_doc_length);
                q.iter()
                    .filter_map(|&(t, qc)| {
                        let t = t?;
                        let i = doc.binary_search_by_key(&t, |&(id, _)| id).ok()?;
                        let tf = doc[i].1 as f64;
                        Some(qc * self.bm25_idf(t) * tf * (BM25_K1 + 1.0) / (tf + norm))
                    })
                    .sum()
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = CACHE_MAGIC.to_vec();
        out.push(CACHE_VERSION);
        out.extend(serde_json::to_vec(self).expect("index serialises"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 5 || &bytes[..4] != CACHE_MAGIC {
            return Err(KbError::BadCache("missing SKB1 magic".into()));
        }
        if bytes[4] != CACHE_VERSION {
            return Err(KbError::BadCache(format!("unsupported version {}", bytes[4])));
        }
        let idx: KbIndex = serde_json::from_slice(&bytes[5..]).map_err(|e| KbError::BadCache(e.to_string()))?;
        idx.check()?;
        Ok(idx)
    }

    fn check(&self) -> Result<()> {
        let n = self.ids.len();
        let bad = |m: &str| Err(KbError::BadCache(m.to_string()));
        if n == 0 {
            return bad("no documents");
        }
        if self.term_freqs.len() != n || self.doc_lengths.len() != n || self.doc_freqs.len() != self.vocabulary.len() {
            return bad("inconsistent table sizes");
        }
        if self.doc_freqs.iter().any(|&d| d as usize > n) || !(self.avg_doc_length > 0.0) {
            return bad("inconsistent statistics");
        }
        let v = self.vocabulary.len() as u32;
        if self.term_freqs.iter().flatten().any(|&(t, _)| t >= v) {
            return bad("term id out of range");
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(io_err(path))?)
    }
}

/// Top `top_k` documents with positive score; ties go to the smaller id.
pub fn query(idx: &KbIndex, text: &str, top_k: usize) -> Result<QueryResult> {
    if top_k == 0 {
        return Err(KbError::InvalidParameter("top_k must be ≥ 1".into()));
    }
    let tokens = tokenize(text);
    if tokens.iter().all(|t| idx.term(t).is_none()) {
        return Ok(QueryResult {
            hits: Vec::new(),
            empty_query: true,
        });
    }
    let scores = idx.scores(&tokens);
    let mut order: Vec<usize> = (0..idx.len()).filter(|&i| scores[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| idx.ids[a].cmp(&idx.ids[b]))
    });
    let hits = order
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(r, i)| RetrievalHit {
            id: idx.ids[i].clone(),
            score: scores[i],
            rank: r + 1,
        })
        .collect();
    Ok(QueryResult {
        hits,
        empty_query: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use irspec_core::features::FeatureSpec;

    fn rec(id: &str, text: &str) -> KbRecord {
        KbRecord {
            id: id.into(),
            material_focus: text.into(),
            technique: String::new(),
            wavelength_bands: String::new(),
            best_preprocessing: vec!["SNV".into()],
            best_feature: FeatureSpec::default(),
            model_architecture: String::new(),
            citation: String::new(),
        }
    }

    fn toy() -> Vec<KbRecord> {
        vec![
            rec("a", "tea tea leaf"),
            rec("b", "ink stamp"),
            rec("c", "tea water water water"),
        ]
    }

    #[test]
    fn bm25_matches_hand_evaluation() {
        let idx = build_index(&toy(), Engine::BM25).unwrap();
        // N=3, avgdl=3; tea in 2 docs
        let idf_tea = ((3.0 - 2.0 + 0.5) / (2.0 + 0.5) + 1.0f64).ln();
        let a = idf_tea * 2.0 * 2.5 / (2.0 + 1.5 * (0.25 + 0.75 * 3.0 / 3.0));
        let c = idf_tea * 1.0 * 2.5 / (1.0 + 1.5 * (0.25 + 0.75 * 4.0 / 3.0));
        let r = query(&idx, "tea", 3).unwrap();
        assert_eq!(r.hits.len(), 2);
        assert_eq!(r.hits[0].id, "a");
        assert!((r.hits[0].score - a).abs() < 1e-9);
        assert!((r.hits[1].score - c).abs() < 1e-9);
    }

    #[test]
    fn tfidf_and_bow_match_hand_cosines() {
        let bow = build_index(&toy(), Engine::BoW).unwrap();
        let r = query(&bow, "water tea", 3).unwrap();
        // c = (tea 1, water 3): cos = 4 / (sqrt2 * sqrt10)
        assert_eq!(r.hits[0].id, "c");
        assert!((r.hits[0].score - 4.0 / (2f64.sqrt() * 10f64.sqrt())).abs() < 1e-12);
        let tfidf = build_index(&toy(), Engine::TFIDF).unwrap();
        let idf = |df: f64| (4.0 / (df + 1.0)).ln() + 1.0;
        let (wt, ww) = (idf(2.0), idf(1.0));
        let dn = (wt * wt + 9.0 * ww * ww).sqrt();
        let qn = (wt * wt + ww * ww).sqrt();
        let expect = (wt * wt + 3.0 * ww * ww) / (dn * qn);
        let r = query(&tfidf, "water tea", 3).unwrap();
        assert!((r.hits[0].score - expect).abs() < 1e-12);
    }

    #[test]
    fn sole_hit_and_empty_query() {
        for e in Engine::ALL {
            let idx = build_index(&toy(), e).unwrap();
            let r = query(&idx, "stamp", 3).unwrap();
            assert_eq!(r.hits.iter().map(|h| h.id.as_str()).collect::<Vec<_>>(), ["b"]);
            let r = query(&idx, "zzz ?", 3).unwrap();
            assert!(r.empty_query && r.hits.is_empty());
        }
    }

    #[test]
    fn ties_break_by_id() {
        let recs = vec![rec("z", "ink"), rec("m", "ink"), rec("b", "ink")];
        for e in Engine::ALL {
            let idx = build_index(&recs, e).unwrap();
            let ids: Vec<String> = query(&idx, "ink", 3).unwrap().hits.into_iter().map(|h| h.id).collect();
            assert_eq!(ids, ["b", "m", "z"]);
        }
    }

    #[test]
    fn cache_round_trip_and_rejection() {
        let idx = build_index(&toy(), Engine::TFIDF).unwrap();
        let bytes = idx.to_bytes();
        assert_eq!(&bytes[..4], b"SKB1");
        assert_eq!(bytes[4], CACHE_VERSION);
        assert_eq!(KbIndex::from_bytes(&bytes).unwrap(), idx);
        assert_eq!(build_index(&toy(), Engine::TFIDF).unwrap().to_bytes(), bytes);
        assert!(KbIndex::from_bytes(b"SKB2\x01{}").is_err());
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(KbIndex::from_bytes(&v).is_err());
        assert!(matches!(build_index(&[], Engine::BoW), Err(KbError::EmptyCorpus)));
    }

    #[test]
    fn vocabulary_is_union() {
        let idx = build_index(&toy(), Engine::BoW).unwrap();
        assert_eq!(idx.vocabulary, ["ink", "leaf", "stamp", "tea", "water"]);
        assert_eq!(idx.doc_freqs, [1, 1, 1, 2, 1]);
    }
}
