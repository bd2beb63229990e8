use irspec_core::model::{FeatureMatrix, Label, TaskType};
use thiserror::Error;

use crate::gateway::{estimate_tokens, Message};

pub const EXEMPLAR_HEADER: &str = "Exemplars:";
pub const QUERY_HEADER: &str = "Queries:";
pub const TASK_LINE_PREFIX: &str = "Task: ";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PromptError {
    #[error("no exemplars")]
    NoExemplars,
    #[error("sample index {0} out of range")]
    BadIndex(usize),
    #[error("exemplar {0} has no usable label")]
    BadLabel(String),
    #[error("prompt needs ~{estimated} tokens, budget is {budget}")]
    BudgetExceeded { estimated: usize, budget: usize },
}

/// What the model is told about the data.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptContext {
    pub material: String,
    /// e.g. `principal component scores of SG+SNV preprocessed spectra`.
    pub feature_description: String,
    /// Unit of regression targets, may be empty.
    pub unit: String,
    pub token_budget: usize,
}

/// Six significant digits, printed without exponent noise.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    let s = rounded.to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Label text as shown to the model.
pub fn render_label(l: &Label) -> String {
    match l {
        Label::Class(c) => c.clone(),
        Label::Flag(true) => "normal".into(),
        Label::Flag(false) => "anomaly".into(),
        Label::Value { value, .. } => format_sig6(*value),
    }
}

fn task_text(task: TaskType, ctx: &PromptContext) -> (String, String) {
    match task {
        TaskType::Classification => (
            "assign each query sample to one of the classes seen among the exemplars".into(),
            "[{\"id\": \"<id>\", \"label\": \"<class>\"}, ...] using only class names that appear among the exemplars".into(),
        ),
        TaskType::Regression => {
            let unit = if ctx.unit.is_empty() { String::new() } else { format!(" in {}", ctx.unit) };
            (
                format!("predict the numeric target{unit} of each query sample"),
                "[{\"id\": \"<id>\", \"value\": <number>}, ...]".into(),
            )
        }
        TaskType::AnomalyDetection => (
            "decide whether each query sample is normal or an anomaly".into(),
            "[{\"id\": \"<id>\", \"flag\": <true if normal, false if anomaly>, \"score\": <anomaly score in [0, 1], higher means more anomalous>}, ...]; both flag and score are required".into(),
        ),
    }
}

fn row_text(values: &[f64]) -> String {
    values.iter().map(|&v| format_sig6(v)).collect::<Vec<_>>().join(",")
}

/// System message with task, feature semantics and output schema; user
/// message with labelled exemplar lines then unlabelled query lines.
pub fn build_prompt(
    task: TaskType,
    features: &FeatureMatrix,
    truth: &[Label],
    exemplars: &[usize],
    queries: &[usize],
    ctx: &PromptContext,
) -> Result<Vec<Message>, PromptError> {
    if exemplars.is_empty() {
        return Err(PromptError::NoExemplars);
    }
    let n = features.len();
    if let Some(&bad) = exemplars.iter().chain(queries).find(|&&i| i >= n || i >= truth.len()) {
        return Err(PromptError::BadIndex(bad));
    }
    let (what, schema) = task_text(task, ctx);
    let system = format!(
        "You are a spectroscopy analysis assistant working on {material} samples. Your job is to {what}.\n\
         Each sample is described by {k} features ({names}), which are {desc}.\n\
         Exemplars are listed as `id | f1,...,f{k} | label` and queries as `id | f1,...,f{k}`.\n\
         Compare each query with the exemplars and answer for every query id exactly once.\n\
         Reply with only a JSON array of the form {schema}.\n\
         {TASK_LINE_PREFIX}{task}",
        material = ctx.material,
        k = features.dim(),
        names = features.feature_names().join(", "),
        desc = ctx.feature_description,
    );
    let mut user = String::new();
    user.push_str(EXEMPLAR_HEADER);
    user.push('\n');
    for &i in exemplars {
        let l = &truth[i];
        if l.task() != task {
            return Err(PromptError::BadLabel(features.ids()[i].clone()));
        }
        user.push_str(&format!(
            "{} | {} | {}\n",
            features.ids()[i],
            row_text(features.row(i)),
            render_label(l)
        ));
    }
    user.push('\n');
    user.push_str(QUERY_HEADER);
    user.push('\n');
    for &i in queries {
        user.push_str(&format!("{} | {}\n", features.ids()[i], row_text(features.row(i))));
    }
    let messages = vec![Message::system(system), Message::user(user)];
    let estimated = estimate_tokens(&messages);
    if estimated > ctx.token_budget {
        return Err(PromptError::BudgetExceeded {
            estimated,
            budget: ctx.token_budget,
        });
    }
    Ok(messages)
}
