use std::collections::BTreeMap;

use irspec_core::metrics::{auc, r_squared, rmse};
use irspec_core::model::{Label, TaskType};

use super::config::StopRule;
use super::parse::Prediction;

/// Name of the metric driving convergence.
pub fn primary_metric(task: TaskType) -> &'static str {
    match task {
        TaskType::Classification => "accuracy",
        TaskType::Regression => "r2",
        TaskType::AnomalyDetection => "auc",
    }
}

/// Metrics of `preds` against `truth` over the ids of `truth`.
///
/// Classification: `accuracy`. Regression: `r2`, `rmse`. Anomaly (anomalies
/// are the positive class): `auc`, and `precision` when at least one sample
/// is predicted anomalous.
pub fn task_metrics(
    task: TaskType,
    preds: &BTreeMap<String, Prediction>,
    truth: &BTreeMap<String, Label>,
) -> Result<BTreeMap<String, f64>, String> {
    let mut pairs = Vec::with_capacity(truth.len());
    for (id, l) in truth {
        let p = preds.get(id).ok_or_else(|| format!("no prediction for `{id}`"))?;
        pairs.push((p, l));
    }
    let mut m = BTreeMap::new();
    match task {
        TaskType::Classification => {
            let mut hit = 0usize;
            for (p, l) in &pairs {
                let (Some(p), Some(t)) = (p.label(), l.as_class()) else {
                    return Err("classification needs class labels and predictions".into());
                };
                hit += (p == t) as usize;
            }
            m.insert("accuracy".into(), hit as f64 / pairs.len().max(1) as f64);
        }
        TaskType::Regression => {
            let mut p = Vec::new();
            let mut t = Vec::new();
            for (pr, l) in &pairs {
                match (pr.value(), l.as_value()) {
                    (Some(a), Some(b)) => {
                        p.push(a);
                        t.push(b);
                    }
                    _ => return Err("regression needs numeric labels and predictions".into()),
                }
            }
            m.insert("r2".into(), r_squared(&p, &t).map_err(|e| e.to_string())?);
            m.insert("rmse".into(), rmse(&p, &t).map_err(|e| e.to_string())?);
        }
        TaskType::AnomalyDetection => {
            let mut scores = Vec::new();
            let mut positive = Vec::new();
            let (mut tp, mut fp) = (0usize, 0usize);
            for (pr, l) in &pairs {
                let (Some((flag, score)), Some(normal)) = (pr.anomaly(), l.as_flag()) else {
                    return Err("anomaly detection needs flag labels and predictions".into());
                };
                scores.push(score);
                positive.push(!normal);
                if !flag {
                    if normal {
                        fp += 1;
                    } else {
                        tp += 1;
                    }
                }
            }
            m.insert("auc".into(), auc(&scores, &positive).map_err(|e| e.to_string())?);
            if tp + fp > 0 {
                m.insert("precision".into(), tp as f64 / (tp + fp) as f64);
            }
        }
    }
    Ok(m)
}

/// Convergence test between consecutive rounds.
pub fn converged(previous: f64, current: f64, delta: f64, rule: StopRule) -> bool {
    let d = current - previous;
    match rule {
        StopRule::Signed => d < delta,
        StopRule::Absolute => d.abs() < delta,
    }
}
