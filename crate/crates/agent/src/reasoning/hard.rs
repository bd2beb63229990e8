use std::collections::{BTreeMap, BTreeSet};

use irspec_core::model::{Label, TaskType};

use super::config::ReasoningConfig;
use super::parse::Prediction;

/// Samples the current round got wrong, most informative first, excluding
/// ids already among the exemplars.
///
/// - classification: every misclassified id, by descending id, capped at
///   `hard_sample_cap`;
/// - regression: ids whose absolute residual exceeds this round's RMSE, by
///   residual size, capped at `hard_sample_top_k`;
/// - anomaly: ids ranked by how many misordered (anomaly, normal) pairs they
///   sit in, a pair being misordered when the anomaly does not score
///   strictly higher; capped at `hard_sample_top_k`.
pub fn select_hard_samples(
    task: TaskType,
    preds: &BTreeMap<String, Prediction>,
    truth: &BTreeMap<String, Label>,
    exemplars: &BTreeSet<String>,
    cfg: &ReasoningConfig,
) -> Vec<String> {
    let eligible = |id: &String| !exemplars.contains(id) && preds.contains_key(id);
    match task {
        TaskType::Classification => {
            let mut wrong: Vec<String> = truth
                .iter()
                .filter(|(id, _)| eligible(id))
                .filter(|(id, l)| preds[*id].label() != l.as_class())
                .map(|(id, _)| id.clone())
                .collect();
            wrong.reverse();
            wrong.truncate(cfg.hard_sample_cap);
            wrong
        }
        TaskType::Regression => {
            let residuals: Vec<(String, f64)> = truth
                .iter()
                .filter_map(|(id, l)| Some((id.clone(), (preds.get(id)?.value()? - l.as_value()?).abs())))
                .collect();
            if residuals.is_empty() {
                return Vec::new();
            }
            let eps = (residuals.iter().map(|(_, r)| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
            let mut big: Vec<(String, f64)> = residuals
                .into_iter()
                .filter(|(id, r)| *r > eps && eligible(id))
                .collect();
            big.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            big.into_iter().take(cfg.hard_sample_top_k).map(|(id, _)| id).collect()
        }
        TaskType::AnomalyDetection => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (id, l) in truth {
                let (Some((_, s)), Some(normal)) = (preds.get(id).and_then(Prediction::anomaly), l.as_flag()) else {
                    continue;
                };
                if normal {
                    neg.push((id, s));
                } else {
                    pos.push((id, s));
                }
            }
            let mut count: BTreeMap<&String, usize> = BTreeMap::new();
            for &(p, sp) in &pos {
                for &(n, sn) in &neg {
                    if sp <= sn {
                        *count.entry(p).or_default() += 1;
                        *count.entry(n).or_default() += 1;
                    }
                }
            }
            let mut ranked: Vec<(&String, usize)> = count.into_iter().filter(|(id, _)| eligible(id)).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            ranked
                .into_iter()
                .take(cfg.hard_sample_top_k)
                .map(|(id, _)| id.clone())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(n: usize, wrong: usize) -> (BTreeMap<String, Prediction>, BTreeMap<String, Label>) {
        let mut p = BTreeMap::new();
        let mut t = BTreeMap::new();
        for i in 0..n {
            let id = format!("s{i:02}");
            t.insert(id.clone(), Label::Class("A".into()));
            let l = if i < wrong { "B" } else { "A" };
            p.insert(id, Prediction::Class { label: l.into() });
        }
        (p, t)
    }

    #[test]
    fn classification_cap_and_empty() {
        let cfg = ReasoningConfig::default();
        let (p, t) = cls(20, 0);
        assert!(select_hard_samples(TaskType::Classification, &p, &t, &BTreeSet::new(), &cfg).is_empty());
        let (p, t) = cls(20, 12);
        let h = select_hard_samples(TaskType::Classification, &p, &t, &BTreeSet::new(), &cfg);
        assert_eq!(h.len(), 10);
        assert_eq!(h[0], "s11");
        let ex: BTreeSet<String> = ["s11".to_string()].into();
        assert!(!select_hard_samples(TaskType::Classification, &p, &t, &ex, &cfg).contains(&"s11".to_string()));
    }

    #[test]
    fn one_inverted_pair() {
        let mut p = BTreeMap::new();
        let mut t = BTreeMap::new();
        let rows = [
            ("n1", true, 0.1),
            ("n2", true, 0.2),
            ("n3", true, 0.8),
            ("a1", false, 0.9),
            ("a2", false, 0.7),
        ];
        for (id, normal, s) in rows {
            t.insert(id.to_string(), Label::Flag(normal));
            p.insert(id.to_string(), Prediction::Anomaly { flag: normal, score: s });
        }
        let h = select_hard_samples(
            TaskType::AnomalyDetection,
            &p,
            &t,
            &BTreeSet::new(),
            &ReasoningConfig::default(),
        );
        assert_eq!(h, ["a2", "n3"]);
    }

    #[test]
    fn regression_residuals_above_rmse() {
        let mut p = BTreeMap::new();
        let mut t = BTreeMap::new();
        for (i, r) in [0.0, 0.1, -0.1, 3.0, -2.0].iter().enumerate() {
            let id = format!("r{i}");
            t.insert(
                id.clone(),
                Label::Value {
                    value: 10.0,
                    unit: String::new(),
                },
            );
            p.insert(id, Prediction::Value { value: 10.0 + r });
        }
        // rmse = sqrt(13.02 / 5) ≈ 1.61
        let h = select_hard_samples(
            TaskType::Regression,
            &p,
            &t,
            &BTreeSet::new(),
            &ReasoningConfig::default(),
        );
        assert_eq!(h, ["r3", "r4"]);
    }
}
