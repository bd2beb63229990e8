use std::collections::{BTreeMap, BTreeSet};

use irspec_core::model::TaskType;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::json::{strip_code_fences, JsonError};

/// One model answer, in the wire shape of its task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prediction {
    Class {
        label: String,
    },
    Value {
        value: f64,
    },
    /// `flag` is `true` for normal; `score` is the anomaly score.
    Anomaly {
        flag: bool,
        score: f64,
    },
}

impl Prediction {
    pub fn label(&self) -> Option<&str> {
        match self {
            Prediction::Class { label } => Some(label),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Prediction::Value { value } => Some(*value),
            _ => None,
        }
    }

    pub fn anomaly(&self) -> Option<(bool, f64)> {
        match self {
            Prediction::Anomaly { flag, score } => Some((*flag, *score)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Predictions {
    pub by_id: BTreeMap<String, Prediction>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unparseable response: {0}")]
    UnparseableResponse(String),
    #[error("missing ids: {}", .0.join(", "))]
    MissingIds(Vec<String>),
    #[error("duplicate ids: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
    #[error("unexpected ids: {}", .0.join(", "))]
    UnexpectedIds(Vec<String>),
}

fn bad(msg: impl Into<String>) -> ParseError {
    ParseError::UnparseableResponse(msg.into())
}

fn id_of(v: &Value) -> Result<String, ParseError> {
    match v.get("id") {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        _ => Err(bad(format!("entry without a string `id`: {v}"))),
    }
}

fn one(task: TaskType, v: &Value, id: &str, warnings: &mut Vec<String>) -> Result<Prediction, ParseError> {
    match task {
        TaskType::Classification => match v.get("label") {
            Some(Value::String(s)) => Ok(Prediction::Class {
                label: s.trim().to_string(),
            }),
            Some(Value::Number(n)) => Ok(Prediction::Class { label: n.to_string() }),
            _ => Err(bad(format!("`{id}` has no string `label`"))),
        },
        TaskType::Regression => {
            let value = v
                .get("value")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad(format!("`{id}` has no numeric `value`")))?;
            if !value.is_finite() {
                return Err(bad(format!("`{id}` value is not finite")));
            }
            Ok(Prediction::Value { value })
        }
        TaskType::AnomalyDetection => {
            let flag = v
                .get("flag")
                .and_then(Value::as_bool)
                .ok_or_else(|| bad(format!("`{id}` has no boolean `flag`")))?;
            let score = match v.get("score") {
                None | Some(Value::Null) => {
                    warnings.push(format!("`{id}` has no score; using its flag"));
                    if flag {
                        0.0
                    } else {
                        1.0
                    }
                }
                Some(s) => {
                    let s = s.as_f64().ok_or_else(|| bad(format!("`{id}` score is not a number")))?;
                    if !s.is_finite() {
                        return Err(bad(format!("`{id}` score is not finite")));
                    }
                    if !(0.0..=1.0).contains(&s) {
                        warnings.push(format!("`{id}` score {s} clamped to [0, 1]"));
                    }
                    s.clamp(0.0, 1.0)
                }
            };
            Ok(Prediction::Anomaly { flag, score })
        }
    }
}

/// Strict parse of a JSON array answering every expected id exactly once.
pub fn parse_predictions(task: TaskType, response: &str, expected: &[String]) -> Result<Predictions, ParseError> {
    let body = strip_code_fences(response);
    let value: Value = serde_json::from_str(body).map_err(|e| bad(JsonError::from(e).to_string()))?;
    let items = match value {
        Value::Array(a) => a,
        // a lone object is accepted only when one answer is expected
        Value::Object(_) if expected.len() == 1 => vec![value],
        other => return Err(bad(format!("expected a JSON array, got {}", kind(&other)))),
    };
    let expected_set: BTreeSet<&str> = expected.iter().map(String::as_str).collect();
    let mut out = Predictions::default();
    let mut dup = BTreeSet::new();
    let mut unexpected = BTreeSet::new();
    for item in &items {
        if !item.is_object() {
            return Err(bad(format!("array entry is {}, not an object", kind(item))));
        }
        let id = id_of(item)?;
        if !expected_set.contains(id.as_str()) {
            unexpected.insert(id);
            continue;
        }
        let p = one(task, item, &id, &mut out.warnings)?;
        if out.by_id.insert(id.clone(), p).is_some() {
            dup.insert(id);
        }
    }
    if !dup.is_empty() {
        return Err(ParseError::DuplicateIds(dup.into_iter().collect()));
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|id| !out.by_id.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(ParseError::MissingIds(missing));
    }
    if !unexpected.is_empty() {
        return Err(ParseError::UnexpectedIds(unexpected.into_iter().collect()));
    }
    Ok(out)
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn valid_and_fenced() {
        let r = r#"[{"id":"a","label":"X"},{"id":"b","label":"Y"}]"#;
        let p = parse_predictions(TaskType::Classification, r, &ids(&["a", "b"])).unwrap();
        assert_eq!(p.by_id["b"], Prediction::Class { label: "Y".into() });
        let fenced = format!("```json\n{r}\n```");
        assert_eq!(
            parse_predictions(TaskType::Classification, &fenced, &ids(&["a", "b"])).unwrap(),
            p
        );
    }

    #[test]
    fn id_errors() {
        let r = r#"[{"id":"a","value":1.5}]"#;
        assert_eq!(
            parse_predictions(TaskType::Regression, r, &ids(&["a", "b"])),
            Err(ParseError::MissingIds(ids(&["b"])))
        );
        let r = r#"[{"id":"a","value":1},{"id":"a","value":2}]"#;
        assert_eq!(
            parse_predictions(TaskType::Regression, r, &ids(&["a"])),
            Err(ParseError::DuplicateIds(ids(&["a"])))
        );
        let r = r#"[{"id":"a","value":1},{"id":"z","value":2}]"#;
        assert_eq!(
            parse_predictions(TaskType::Regression, r, &ids(&["a"])),
            Err(ParseError::UnexpectedIds(ids(&["z"])))
        );
        assert!(matches!(
            parse_predictions(TaskType::Regression, "the answer is 4", &ids(&["a"])),
            Err(ParseError::UnparseableResponse(_))
        ));
    }

    #[test]
    fn anomaly_scores_clamped_or_defaulted() {
        let r = r#"[{"id":"a","flag":true,"score":1.7},{"id":"b","flag":false}]"#;
        let p = parse_predictions(TaskType::AnomalyDetection, r, &ids(&["a", "b"])).unwrap();
        assert_eq!(p.by_id["a"], Prediction::Anomaly { flag: true, score: 1.0 });
        assert_eq!(
            p.by_id["b"],
            Prediction::Anomaly {
                flag: false,
                score: 1.0
            }
        );
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn predictions_round_trip_through_json() {
        for p in [
            Prediction::Class { label: "A".into() },
            Prediction::Value { value: 2.5 },
            Prediction::Anomaly {
                flag: false,
                score: 0.25,
            },
        ] {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<Prediction>(&s).unwrap(), p);
        }
    }
}
