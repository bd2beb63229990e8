//! Method comparison tables: LLM runs next to classical baselines evaluated
//! on the very same feature matrices and splits.

use std::collections::BTreeMap;

use irspec_core::baselines::{fit_predict, BaselineOutput, BaselineSpec};
use irspec_core::model::TaskType;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reasoning::{aggregate, feature_hash, task_metrics, Prediction, RepeatInput, RunReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("no LLM run to compare against")]
    NoRuns,
    #[error("runs disagree on the task")]
    TaskMismatch,
    #[error("repeat {repeat}: baseline features differ from the LLM run's (hash {expected} vs {actual})")]
    HashMismatch {
        repeat: usize,
        expected: String,
        actual: String,
    },
    #[error("repeat {repeat}: {message}")]
    Prepare { repeat: usize, message: String },
    #[error("{method}, repeat {repeat}: {message}")]
    Baseline {
        method: String,
        repeat: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,metric,mean,std\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", csv_field(&r.method), r.metric, r.mean, r.std));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serialises");
        s.push('\n');
        s
    }

    pub fn get(&self, method: &str, metric: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.method == method && r.metric == metric)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn rows_for(method: &str, metrics: &[BTreeMap<String, f64>]) -> Vec<ComparisonRow> {
    let agg = aggregate(metrics);
    agg.mean
        .iter()
        .map(|(k, &mean)| ComparisonRow {
            method: method.to_string(),
            metric: k.clone(),
            mean,
            std: agg.std[k],
            n: agg.n[k],
        })
        .collect()
}

/// Test-set predictions of one baseline. Fitted on every labelled sample
/// the LLM could see (training and validation parts).
pub fn baseline_predictions(spec: &BaselineSpec, input: &RepeatInput) -> Result<BTreeMap<String, Prediction>, String> {
    let fm = &input.features;
    let fit_idx: Vec<usize> = input
        .split
        .train
        .iter()
        .chain(&input.split.validation)
        .copied()
        .collect();
    let train: Vec<Vec<f64>> = fit_idx.iter().map(|&i| fm.row(i).to_vec()).collect();
    let labels: Vec<_> = fit_idx.iter().map(|&i| input.truth[i].clone()).collect();
    let test: Vec<Vec<f64>> = input.split.test.iter().map(|&i| fm.row(i).to_vec()).collect();
    let out = fit_predict(spec, &train, &labels, &test).map_err(|e| e.to_string())?;
    let ids = input.split.test.iter().map(|&i| fm.ids()[i].clone());
    Ok(match out {
        BaselineOutput::Classes { labels } => ids
            .zip(labels)
            .map(|(id, label)| (id, Prediction::Class { label }))
            .collect(),
        BaselineOutput::Values { values } => ids
            .zip(values)
            .map(|(id, value)| (id, Prediction::Value { value }))
            .collect(),
        BaselineOutput::Anomaly { flags, scores, .. } => ids
            .zip(flags.into_iter().zip(scores))
            .map(|(id, (flag, score))| (id, Prediction::Anomaly { flag, score }))
            .collect(),
    })
}

/// One row per method and metric. Baselines are evaluated on the repeats
/// that succeeded in the first run, with inputs rebuilt by `prepare` and
/// checked against the recorded feature hashes.
pub fn compare(
    runs: &[&RunReport],
    specs: &[BaselineSpec],
    prepare: &mut dyn FnMut(usize, u64) -> Result<RepeatInput, String>,
) -> Result<ComparisonTable, CompareError> {
    let first = runs.first().ok_or(CompareError::NoRuns)?;
    let task: TaskType = first.task;
    if runs.iter().any(|r| r.task != task) {
        return Err(CompareError::TaskMismatch);
    }
    let mut table = ComparisonTable::default();
    for run in runs {
        let ok: Vec<BTreeMap<String, f64>> = run
            .repeats
            .iter()
            .filter(|r| r.is_ok())
            .map(|r| r.test_metrics.clone())
            .collect();
        table.rows.extend(rows_for(&run.method, &ok));
    }
    if specs.is_empty() {
        return Ok(table);
    }
    let mut per_spec: Vec<Vec<BTreeMap<String, f64>>> = vec![Vec::new(); specs.len()];
    for rep in first.repeats.iter().filter(|r| r.is_ok()) {
        let input = prepare(rep.repeat, rep.seed).map_err(|message| CompareError::Prepare {
            repeat: rep.repeat,
            message,
        })?;
        let actual = feature_hash(&input.features);
        if actual != rep.feature_hash {
            return Err(CompareError::HashMismatch {
                repeat: rep.repeat,
                expected: rep.feature_hash.clone(),
                actual,
            });
        }
        let truth = input
            .split
            .test
            .iter()
            .map(|&i| (input.features.ids()[i].clone(), input.truth[i].clone()))
            .collect();
        for (spec, acc) in specs.iter().zip(&mut per_spec) {
            let fail = |message: String| CompareError::Baseline {
                method: spec.name(),
                repeat: rep.repeat,
                message,
            };
            let preds = baseline_predictions(spec, &input).map_err(fail)?;
            acc.push(task_metrics(task, &preds, &truth).map_err(fail)?);
        }
    }
    for (spec, metrics) in specs.iter().zip(&per_spec) {
        table.rows.extend(rows_for(&spec.name(), metrics));
    }
    Ok(table)
}
