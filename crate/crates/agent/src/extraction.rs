//! Research object and task type from a natural-language question.

use std::path::Path;

use irspec_core::model::TaskType;
use irspec_kb::tokenize;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, LlmConfig, LlmError, Message, EXTRACTION_TEMPERATURE};
use crate::json::{strip_code_fences, JsonError};

pub const MAX_ATTEMPTS: usize = 3;
pub const DEFAULT_FUZZY_THRESHOLD: u32 = 80;

/// Marker the algorithmic mock uses to recognise extraction requests.
pub const EXTRACTION_MARKER: &str = "entity recognition for spectroscopy questions";

pub const EXTRACTION_SYSTEM_PROMPT: &str = "You perform entity recognition for spectroscopy questions.\n\
Identify two entities in the user's question:\n\
- research_object: the material or analyte being studied, copied as written in the question;\n\
- task: exactly one of \"classification\", \"anomaly_detection\", \"regression\".\n\
Classification assigns samples to categories (origin, grade, brand, variety). \
Anomaly detection flags abnormal, counterfeit or out-of-specification samples. \
Regression predicts a continuous quantity such as a concentration or content.\n\
Reply with a single JSON object and nothing else:\n\
{\"research_object\": \"...\", \"task\": \"classification|anomaly_detection|regression\"}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedEntities {
    pub research_object: String,
    pub task: TaskType,
    pub raw_response: String,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractionError {
    #[error("empty question")]
    EmptyQuestion,
    #[error("no usable entity JSON after {attempts} attempt(s): {reason}")]
    UnparseableResponse { attempts: usize, reason: String },
    #[error("task `{0}` is not one of classification, anomaly_detection, regression")]
    UnknownTaskType(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    research_object: String,
    task: String,
}

enum Parsed {
    Ok(String, TaskType),
    Malformed(String),
    UnknownTask(String),
}

fn parse(text: &str) -> Parsed {
    let body = strip_code_fences(text);
    let w: Wire = match serde_json::from_str(body) {
        Ok(w) => w,
        Err(e) => return Parsed::Malformed(JsonError::from(e).to_string()),
    };
    let object = w.research_object.trim().to_string();
    if object.is_empty() {
        return Parsed::Malformed("research_object is empty".into());
    }
    let folded: String = w.task.trim().to_lowercase().replace([' ', '-'], "_");
    match folded.as_str() {
        "classification" => Parsed::Ok(object, TaskType::Classification),
        "anomaly_detection" => Parsed::Ok(object, TaskType::AnomalyDetection),
        "regression" => Parsed::Ok(object, TaskType::Regression),
        _ => Parsed::UnknownTask(w.task),
    }
}

pub fn extraction_messages(question: &str) -> Vec<Message> {
    vec![
        Message::system(EXTRACTION_SYSTEM_PROMPT),
        Message::user(question.trim()),
    ]
}

/// Asks the model for the two entities. A malformed reply gets a
/// correction turn; three attempts in total.
pub fn extract_entities(gw: &Gateway, cfg: &LlmConfig, question: &str) -> Result<ExtractedEntities, ExtractionError> {
    if question.trim().is_empty() {
        return Err(ExtractionError::EmptyQuestion);
    }
    let cfg = cfg.with_temperature(EXTRACTION_TEMPERATURE);
    let mut messages = extraction_messages(question);
    let mut reason = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let ex = gw.complete(&cfg, &messages, &format!("extract attempt {attempt}"))?;
        match parse(&ex.response) {
            Parsed::Ok(research_object, task) => {
                return Ok(ExtractedEntities {
                    research_object,
                    task,
                    raw_response: ex.response,
                    attempts: attempt,
                })
            }
            Parsed::UnknownTask(t) => return Err(ExtractionError::UnknownTaskType(t)),
            Parsed::Malformed(r) => {
                log::warn!("entity reply {attempt} unusable: {r}");
                messages.push(Message::assistant(ex.response));
                messages.push(Message::user(format!(
                    "That reply could not be parsed ({r}). Answer again with only the JSON object \
                     {{\"research_object\": \"...\", \"task\": \"classification|anomaly_detection|regression\"}}."
                )));
                reason = r;
            }
        }
    }
    Err(ExtractionError::UnparseableResponse {
        attempts: MAX_ATTEMPTS,
        reason,
    })
}

fn normalise(s: &str) -> String {
    let mut t = tokenize(s);
    t.sort();
    t.join(" ")
}

/// Token-sort ratio in `[0, 100]`: `100 (1 - lev / max_len)` on the sorted,
/// tokenised strings.
pub fn fuzzy_similarity(a: &str, b: &str) -> u32 {
    let (a, b) = (normalise(a), normalise(b));
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 100;
    }
    let d = strsim::levenshtein(&a, &b);
    (100.0 * (1.0 - d as f64 / len as f64)).round() as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityEvalCase {
    pub question: String,
    pub gold_object: String,
    pub gold_task: TaskType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub question: String,
    pub predicted_object: Option<String>,
    pub predicted_task: Option<TaskType>,
    pub similarity: u32,
    pub object_correct: bool,
    pub task_correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionEval {
    /// Percent of cases whose object scores at least `threshold`.
    pub object_accuracy: f64,
    /// Percent of exact task matches.
    pub task_accuracy: f64,
    pub threshold: u32,
    pub cases: Vec<CaseOutcome>,
}

/// Runs every case; failures count as wrong on both entities.
pub fn evaluate_extraction(
    gw: &Gateway,
    cfg: &LlmConfig,
    cases: &[EntityEvalCase],
    threshold: u32,
) -> Result<ExtractionEval, ExtractionError> {
    if cases.is_empty() {
        return Err(ExtractionError::EmptyQuestion);
    }
    let mut out = Vec::with_capacity(cases.len());
    for c in cases {
        let o = match extract_entities(gw, cfg, &c.question) {
            Ok(e) => {
                let similarity = fuzzy_similarity(&e.research_object, &c.gold_object);
                CaseOutcome {
                    question: c.question.clone(),
                    similarity,
                    object_correct: similarity >= threshold,
                    task_correct: e.task == c.gold_task,
                    predicted_object: Some(e.research_object),
                    predicted_task: Some(e.task),
                    error: None,
                }
            }
            Err(e) => CaseOutcome {
                question: c.question.clone(),
                predicted_object: None,
                predicted_task: None,
                similarity: 0,
                object_correct: false,
                task_correct: false,
                error: Some(e.to_string()),
            },
        };
        out.push(o);
    }
    let pct = |f: fn(&CaseOutcome) -> bool| 100.0 * out.iter().filter(|o| f(o)).count() as f64 / out.len() as f64;
    Ok(ExtractionEval {
        object_accuracy: pct(|o| o.object_correct),
        task_accuracy: pct(|o| o.task_correct),
        threshold,
        cases: out,
    })
}

pub fn load_cases(path: &Path) -> std::io::Result<Vec<EntityEvalCase>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
        .collect()
}
