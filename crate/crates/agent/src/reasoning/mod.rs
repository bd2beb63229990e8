//! Multi-turn few-shot inference: prompts built from feature vectors,
//! per-round validation scoring, hard-sample feedback and a single
//! held-out test evaluation once the loop stops.

mod config;
mod hard;
mod metrics;
mod parse;
mod prompt;
mod report;
mod run;

pub use config::{ReasoningConfig, StopRule};
pub use hard::select_hard_samples;
pub use metrics::{converged, primary_metric, task_metrics};
pub use parse::{parse_predictions, ParseError, Prediction, Predictions};
pub use prompt::{
    build_prompt, format_sig6, render_label, PromptContext, PromptError, EXEMPLAR_HEADER, QUERY_HEADER,
    TASK_LINE_PREFIX,
};
pub use report::{
    aggregate, Aggregate, FailureKind, RepeatReport, RepeatStatus, RunReport, SplitIds, StopReason, TurnState,
    REPORT_SCHEMA_VERSION,
};
pub use run::{
    feature_hash, run_multi_turn, run_repeats, single_turn, RepeatInput, RunFailure, MULTI_METHOD, SINGLE_METHOD,
};
