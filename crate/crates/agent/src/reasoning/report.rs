use std::collections::BTreeMap;

use irspec_core::model::TaskType;
use serde::{Deserialize, Serialize};

use super::config::ReasoningConfig;
use super::parse::Prediction;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitIds {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepeatStatus {
    Ok,
    Failed,
}

/// Which side a failed repeat broke on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The provider could not be reached or refused the request.
    Provider,
    /// The model answered, but never in a usable form.
    Response,
    /// Inputs were inconsistent before any request was made.
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    NoHardSamples,
    MaxRounds,
}

/// One validation round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnState {
    pub round: usize,
    /// Exemplars shown in this round's prompt.
    pub exemplar_ids: Vec<String>,
    /// Exemplars left out of the prompt to fit the token budget.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncated_ids: Vec<String>,
    pub predictions: BTreeMap<String, Prediction>,
    pub metrics: BTreeMap<String, f64>,
    /// Primary metric of this round.
    pub metric: f64,
    pub hard_samples: Vec<String>,
    pub transcript_seqs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatReport {
    pub repeat: usize,
    pub seed: u64,
    /// SHA-256 of the feature matrix this repeat reasoned over.
    pub feature_hash: String,
    pub split: SplitIds,
    pub status: RepeatStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureKind>,
    pub rounds: Vec<TurnState>,
    pub stop_reason: Option<StopReason>,
    /// Round at which the stopping test fired, if it did.
    pub convergence_round: Option<usize>,
    pub test_predictions: BTreeMap<String, Prediction>,
    pub test_metrics: BTreeMap<String, f64>,
    pub test_transcript_seqs: Vec<usize>,
}

impl RepeatReport {
    pub(crate) fn new(repeat: usize, seed: u64) -> Self {
        Self {
            repeat,
            seed,
            feature_hash: String::new(),
            split: SplitIds::default(),
            status: RepeatStatus::Failed,
            error: None,
            failure: None,
            rounds: Vec::new(),
            stop_reason: None,
            convergence_round: None,
            test_predictions: BTreeMap::new(),
            test_metrics: BTreeMap::new(),
            test_transcript_seqs: Vec::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RepeatStatus::Ok
    }
}

/// Mean and sample standard deviation of each test metric over the
/// successful repeats.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: BTreeMap<String, f64>,
    pub std: BTreeMap<String, f64>,
    pub n: BTreeMap<String, usize>,
}

pub fn aggregate<'a>(metrics: impl IntoIterator<Item = &'a BTreeMap<String, f64>>) -> Aggregate {
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for m in metrics {
        for (k, v) in m {
            values.entry(k.clone()).or_default().push(*v);
        }
    }
    let mut agg = Aggregate::default();
    for (k, v) in values {
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        agg.mean.insert(k.clone(), mean);
        agg.std.insert(k.clone(), std);
        agg.n.insert(k, n);
    }
    agg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub method: String,
    pub task: TaskType,
    pub material: String,
    pub backend: String,
    pub model: String,
    pub config: ReasoningConfig,
    /// Ground truth of every sample, as rendered to the model.
    pub labels: BTreeMap<String, String>,
    pub repeats: Vec<RepeatReport>,
    pub aggregate: Aggregate,
    pub failed_repeats: usize,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Long-format table, one row per repeat and test metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,repeat,seed,status,rounds,stop_reason,metric,value\n");
        for r in &self.repeats {
            let stop = r
                .stop_reason
                .map(|s| serde_json::to_value(s).unwrap().as_str().unwrap().to_string())
                .unwrap_or_default();
            let status = if r.is_ok() { "ok" } else { "failed" };
            if r.test_metrics.is_empty() {
                out.push_str(&format!(
                    "{},{},{},{status},{},{stop},,\n",
                    self.method,
                    r.repeat,
                    r.seed,
                    r.rounds.len()
                ));
            }
            for (k, v) in &r.test_metrics {
                out.push_str(&format!(
                    "{},{},{},{status},{},{stop},{k},{v}\n",
                    self.method,
                    r.repeat,
                    r.seed,
                    r.rounds.len()
                ));
            }
        }
        out
    }

    pub fn primary_scores(&self, metric: &str) -> Vec<Option<f64>> {
        self.repeats
            .iter()
            .map(|r| r.test_metrics.get(metric).copied())
            .collect()
    }
}
