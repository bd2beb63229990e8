//! Evaluation metrics: accuracy, pairwise AUC, R², RMSE.
//!
//! The slice forms pair predictions and truth by position. The `_by_id`
//! forms take id-keyed maps and fail unless both cover the same ids.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::IdMismatch(format!("{a} predictions for {b} truth values")));
    }
    Ok(())
}

fn align<'a, P, Q>(preds: &'a BTreeMap<String, P>, truth: &'a BTreeMap<String, Q>) -> Result<(Vec<&'a P>, Vec<&'a Q>)> {
    let missing: Vec<&str> = truth
        .keys()
        .filter(|k| !preds.contains_key(*k))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = preds
        .keys()
        .filter(|k| !truth.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::IdMismatch(format!(
            "missing predictions for [{}]; unexpected ids [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    Ok(truth.iter().map(|(k, t)| (&preds[k], t)).unzip())
}

/// Fraction of exact matches.
pub fn accuracy<L: PartialEq>(preds: &[L], truth: &[L]) -> Result<f64> {
    same_len(preds.len(), truth.len())?;
    if truth.is_empty() {
        return Err(Error::TooFewSamples("accuracy of an empty set".into()));
    }
    let hits = preds.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

pub fn accuracy_by_id<L: PartialEq>(preds: &BTreeMap<String, L>, truth: &BTreeMap<String, L>) -> Result<f64> {
    let (p, t) = align(preds, truth)?;
    accuracy(&p, &t)
}

/// Pairwise AUC: the share of (positive, negative) pairs where the positive
/// scores higher, with ties counting one half.
///
/// `positive[i]` marks the class whose scores should be larger.
pub fn auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    same_len(scores.len(), positive.len())?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::InvalidParameter(format!("score {i} is NaN")));
    }
    let mut neg: Vec<f64> = scores
        .iter()
        .zip(positive)
        .filter(|(_, &p)| !p)
        .map(|(&s, _)| s)
        .collect();
    let pos: Vec<f64> = scores
        .iter()
        .zip(positive)
        .filter(|(_, &p)| p)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    neg.sort_by(|a, b| a.total_cmp(b));
    // twice the Mann-Whitney U, kept integral
    let mut twice_u: u128 = 0;
    for &s in &pos {
        let below = neg.partition_point(|&v| v < s) as u128;
        let not_above = neg.partition_point(|&v| v <= s) as u128;
        twice_u += 2 * below + (not_above - below);
    }
    Ok(twice_u as f64 / (2 * pos.len() as u128 * neg.len() as u128) as f64)
}

/// `1 − SS_res / SS_tot`; negative when worse than predicting the mean.
pub fn r_squared(preds: &[f64], truth: &[f64]) -> Result<f64> {
    same_len(preds.len(), truth.len())?;
    if truth.len() < 2 {
        return Err(Error::TooFewSamples("R² needs at least 2 samples".into()));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantTruth);
    }
    let ss_res: f64 = preds.iter().zip(truth).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn rmse(preds: &[f64], truth: &[f64]) -> Result<f64> {
    same_len(preds.len(), truth.len())?;
    if truth.is_empty() {
        return Err(Error::TooFewSamples("RMSE of an empty set".into()));
    }
    let ss: f64 = preds.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((ss / truth.len() as f64).sqrt())
}

pub fn r_squared_by_id(preds: &BTreeMap<String, f64>, truth: &BTreeMap<String, f64>) -> Result<f64> {
    let (p, t) = align(preds, truth)?;
    r_squared(
        &p.into_iter().copied().collect::<Vec<_>>(),
        &t.into_iter().copied().collect::<Vec<_>>(),
    )
}

pub fn rmse_by_id(preds: &BTreeMap<String, f64>, truth: &BTreeMap<String, f64>) -> Result<f64> {
    let (p, t) = align(preds, truth)?;
    rmse(
        &p.into_iter().copied().collect::<Vec<_>>(),
        &t.into_iter().copied().collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_counts() {
        let t: Vec<u8> = (0..10).collect();
        let mut p = t.clone();
        assert_eq!(accuracy(&p, &t).unwrap(), 1.0);
        p[0] = 99;
        p[1] = 99;
        p[2] = 99;
        assert_eq!(accuracy(&p, &t).unwrap(), 0.7);
        assert!(matches!(accuracy(&p[..3], &t), Err(Error::IdMismatch(_))));
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &[true, false, true, false]).unwrap(), 0.5);
        assert!(matches!(auc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass)));
    }

    #[test]
    fn r2_and_rmse_by_hand() {
        let t = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r_squared(&t, &t).unwrap(), 1.0);
        assert_eq!(r_squared(&[2.5; 4], &t).unwrap(), 0.0);
        // SS_res = 9+4+1+0 = 14, SS_tot = 5
        assert!((r_squared(&[4.0; 4], &t).unwrap() - (1.0 - 14.0 / 5.0)).abs() < 1e-15);
        assert!(matches!(r_squared(&t, &[1.0; 4]), Err(Error::ConstantTruth)));
        assert_eq!(rmse(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        // residuals 1, -2, 2 → sqrt(9/3)
        assert_eq!(rmse(&[2.0, 0.0, 5.0], &[1.0, 2.0, 3.0]).unwrap(), 3f64.sqrt());
    }

    #[test]
    fn keyed_forms_demand_equal_ids() {
        let t: BTreeMap<String, f64> = [("a".into(), 1.0), ("b".into(), 2.0)].into();
        let p: BTreeMap<String, f64> = [("a".into(), 1.0), ("c".into(), 2.0)].into();
        assert!(matches!(rmse_by_id(&p, &t), Err(Error::IdMismatch(_))));
    }
}
