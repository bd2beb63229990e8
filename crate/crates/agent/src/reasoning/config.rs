use serde::{Deserialize, Serialize};

use crate::gateway::REASONING_TEMPERATURE;

/// How the convergence test treats a change in the validation metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `metric_t − metric_{t−1} < δ`; a drop also stops the loop.
    #[default]
    Signed,
    /// `|metric_t − metric_{t−1}| < δ`.
    Absolute,
}

fn d_rounds() -> usize {
    5
}
fn d_delta() -> f64 {
    0.01
}
fn d_cap() -> usize {
    10
}
fn d_top_k() -> usize {
    5
}
fn d_temperature() -> f64 {
    REASONING_TEMPERATURE
}
fn d_repeats() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReasoningConfig {
    #[serde(default = "d_rounds")]
    pub max_rounds: usize,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default)]
    pub stop_rule: StopRule,
    /// Misclassified samples appended per round.
    #[serde(default = "d_cap")]
    pub hard_sample_cap: usize,
    /// Regression and anomaly samples appended per round.
    #[serde(default = "d_top_k")]
    pub hard_sample_top_k: usize,
    #[serde(default = "d_temperature")]
    pub temperature: f64,
    #[serde(default = "d_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ReasoningConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl ReasoningConfig {
    pub fn single_turn(&self) -> Self {
        Self {
            max_rounds: 1,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_rounds == 0 {
            return Err("max_rounds must be ≥ 1".into());
        }
        if !(self.delta > 0.0) {
            return Err(format!("delta must be > 0, got {}", self.delta));
        }
        if self.hard_sample_cap == 0 || self.hard_sample_top_k == 0 {
            return Err("hard-sample caps must be ≥ 1".into());
        }
        if self.repeats == 0 {
            return Err("repeats must be ≥ 1".into());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} outside [0, 2]", self.temperature));
        }
        Ok(())
    }
}
