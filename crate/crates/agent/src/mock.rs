//! Deterministic offline backend that answers extraction requests from a
//! keyword lexicon and reasoning requests by nearest-neighbour lookup on the
//! exemplar rows of the prompt.

use irspec_core::model::TaskType;
use serde_json::{json, Value};

use crate::extraction::EXTRACTION_MARKER;
use crate::gateway::{BackendError, BackendReply, ChatRequest, LlmBackend, Role};
use crate::reasoning::{EXEMPLAR_HEADER, QUERY_HEADER, TASK_LINE_PREFIX};

/// Research objects the mock can recognise, matched case-insensitively.
pub const MATERIAL_LEXICON: &[&str] = &[
    "ink",
    "inks",
    "stamp pad ink",
    "chinese medicine",
    "traditional chinese medicine",
    "crp",
    "c-reactive protein",
    "pu'er tea",
    "tea",
    "waste water",
    "wastewater",
    "olive oil",
    "honey",
    "milk powder",
    "coffee",
    "wheat flour",
    "soil",
    "polymer",
    "microplastics",
    "gasoline",
    "wine",
    "blood serum",
    "cotton",
    "pharmaceutical tablets",
    "rice",
];

const ANOMALY_WORDS: &[&str] = &[
    "anomal",
    "abnormal",
    "counterfeit",
    "fake",
    "adulterat",
    "outlier",
    "out-of-spec",
    "defect",
    "contaminat",
    "fraud",
];
const REGRESSION_WORDS: &[&str] = &[
    "concentration",
    "content",
    "how much",
    "predict the level",
    "quantif",
    "amount",
    "demand",
    "value of",
    "estimate the",
];

/// Offline stand-in for a chat model. The same request always gets the
/// same reply.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlgorithmicBackend;

impl AlgorithmicBackend {
    pub fn new() -> Self {
        Self
    }
}

/// Longest lexicon entry found in `question`, returned as written there.
pub fn mock_research_object(question: &str) -> Option<String> {
    // ASCII folding keeps byte offsets valid in `question`
    let lower = question.to_ascii_lowercase();
    let mut best: Option<(usize, usize)> = None;
    for entry in MATERIAL_LEXICON {
        let mut from = 0;
        while let Some(pos) = lower[from..].find(entry) {
            let start = from + pos;
            let end = start + entry.len();
            let bounded = lower[..start].chars().next_back().is_none_or(|c| !c.is_alphanumeric())
                && lower[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
            if bounded && best.is_none_or(|(s, e)| end - start > e - s) {
                best = Some((start, end));
            }
            from = start + 1;
            while !lower.is_char_boundary(from) {
                from += 1;
            }
        }
    }
    best.map(|(s, e)| question[s..e].to_string())
}

pub fn mock_task(question: &str) -> TaskType {
    let lower = question.to_lowercase();
    if ANOMALY_WORDS.iter().any(|w| lower.contains(w)) {
        TaskType::AnomalyDetection
    } else if REGRESSION_WORDS.iter().any(|w| lower.contains(w)) {
        TaskType::Regression
    } else {
        TaskType::Classification
    }
}

struct Row {
    id: String,
    x: Vec<f64>,
    label: Option<String>,
}

fn parse_row(line: &str, labelled: bool) -> Result<Row, String> {
    let parts: Vec<&str> = line.split(" | ").collect();
    let want = if labelled { 3 } else { 2 };
    if parts.len() != want {
        return Err(format!("malformed row `{line}`"));
    }
    let x = parts[1]
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad feature `{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Row {
        id: parts[0].to_string(),
        x,
        label: labelled.then(|| parts[2].to_string()),
    })
}

fn parse_sections(user: &str) -> Result<(Vec<Row>, Vec<Row>), String> {
    let (ex, q) = user
        .split_once(&format!("\n{QUERY_HEADER}\n"))
        .ok_or("no query section")?;
    let ex = ex
        .strip_prefix(&format!("{EXEMPLAR_HEADER}\n"))
        .ok_or("no exemplar section")?;
    let rows = |s: &str, lab| {
        s.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_row(l, lab))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok((rows(ex, true)?, rows(q, false)?))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exemplars by ascending distance to `x`; ties keep prompt order.
fn ranked<'a>(ex: &'a [Row], x: &[f64]) -> Vec<(f64, &'a Row)> {
    let mut v: Vec<(f64, &Row)> = ex.iter().map(|r| (dist(&r.x, x), r)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn answer(task: TaskType, ex: &[Row], queries: &[Row]) -> Result<Value, String> {
    if ex.is_empty() {
        return Err("no exemplars".into());
    }
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let r = ranked(ex, &q.x);
        let label = |row: &Row| row.label.clone().unwrap_or_default();
        let item = match task {
            TaskType::Classification => json!({"id": q.id, "label": label(r[0].1)}),
            TaskType::Regression => {
                let near = &r[..r.len().min(3)];
                let parse = |row: &Row| label(row).parse::<f64>().map_err(|e| format!("bad target: {e}"));
                let value = if near[0].0 == 0.0 {
                    parse(near[0].1)?
                } else {
                    let (mut num, mut den) = (0.0, 0.0);
                    for (d, row) in near {
                        num += parse(row)? / d;
                        den += 1.0 / d;
                    }
                    num / den
                };
                json!({"id": q.id, "value": value})
            }
            TaskType::AnomalyDetection => {
                let flag = label(r[0].1) == "normal";
                let nearest = |want: &str| r.iter().find(|(_, row)| label(row) == want).map(|(d, _)| *d);
                let score = match (nearest("normal"), nearest("anomaly")) {
                    (Some(dn), Some(da)) if dn + da > 0.0 => dn / (dn + da),
                    (Some(_), Some(_)) => 0.5,
                    (Some(dn), None) => dn / (1.0 + dn),
                    (None, _) => 1.0,
                };
                json!({"id": q.id, "flag": flag, "score": score})
            }
        };
        out.push(item);
    }
    Ok(Value::Array(out))
}

fn task_of(system: &str) -> Result<TaskType, String> {
    let line = system
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix(TASK_LINE_PREFIX))
        .ok_or("no task line in the system message")?;
    line.trim().parse().map_err(|e| format!("{e}"))
}

impl LlmBackend for AlgorithmicBackend {
    fn name(&self) -> &str {
        "algorithmic-mock"
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendError> {
        let system = req
            .messages
            .iter()
            .find(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        // the first user turn carries the payload; correction turns are ignored
        let user = req
            .messages
            .iter()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        if system.contains(EXTRACTION_MARKER) {
            let object = mock_research_object(user).unwrap_or_default();
            let task = mock_task(user);
            let reply = json!({"research_object": object, "task": task.as_str()});
            return Ok(BackendReply::text(reply.to_string()));
        }
        let task = task_of(system).map_err(BackendError::NoScript)?;
        let (ex, q) = parse_sections(user).map_err(BackendError::NoScript)?;
        let v = answer(task, &ex, &q).map_err(BackendError::NoScript)?;
        Ok(BackendReply::text(v.to_string()))
    }
}
