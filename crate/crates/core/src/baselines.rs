//! Classical comparison methods on feature vectors.
//!
//! Anomaly conventions follow the dataset labels: `Flag(true)` marks a
//! normal sample. One-class detectors return anomaly scores (higher means
//! more anomalous) and `true` flags for samples at or under the threshold.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::pls_fit;
use crate::linalg::{cholesky_solve, lstsq, Matrix};
use crate::model::Label;
use crate::scalar::Real;

fn default_k() -> usize {
    3
}
fn default_quantile() -> f64 {
    0.95
}
fn default_latent() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BaselineSpec {
    KnnClassifier {
        #[serde(default = "default_k")]
        k: usize,
    },
    LinearRegression,
    PlsRegression {
        #[serde(default = "default_latent")]
        n_latent: usize,
    },
    OneClassMahalanobis {
        #[serde(default = "default_quantile")]
        quantile: f64,
    },
    OneClassKnnDistance {
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_quantile")]
        quantile: f64,
    },
}

impl BaselineSpec {
    pub fn name(&self) -> String {
        match self {
            BaselineSpec::KnnClassifier { k } => format!("KNN(k={k})"),
            BaselineSpec::LinearRegression => "LR".into(),
            BaselineSpec::PlsRegression { n_latent } => format!("PLSR(n_latent={n_latent})"),
            BaselineSpec::OneClassMahalanobis { quantile } => format!("OneClassMahalanobis(q={quantile})"),
            BaselineSpec::OneClassKnnDistance { k, quantile } => format!("OneClassKNN(k={k}, q={quantile})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (k, q) = match *self {
            BaselineSpec::KnnClassifier { k } => (k, 0.5),
            BaselineSpec::OneClassMahalanobis { quantile } => (1, quantile),
            BaselineSpec::OneClassKnnDistance { k, quantile } => (k, quantile),
            BaselineSpec::PlsRegression { n_latent } => (n_latent, 0.5),
            BaselineSpec::LinearRegression => (1, 0.5),
        };
        if k < 1 || !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: need k ≥ 1 and quantile in (0,1)",
                self.name()
            )));
        }
        Ok(())
    }

    /// Default baselines for a task.
    pub fn defaults_for(task: crate::model::TaskType) -> Vec<BaselineSpec> {
        use crate::model::TaskType::*;
        match task {
            Classification => vec![BaselineSpec::KnnClassifier { k: 3 }],
            Regression => vec![
                BaselineSpec::LinearRegression,
                BaselineSpec::PlsRegression { n_latent: 2 },
            ],
            AnomalyDetection => vec![
                BaselineSpec::OneClassMahalanobis { quantile: 0.95 },
                BaselineSpec::OneClassKnnDistance { k: 3, quantile: 0.95 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineOutput {
    Classes {
        labels: Vec<String>,
    },
    Values {
        values: Vec<f64>,
    },
    Anomaly {
        flags: Vec<bool>,
        scores: Vec<f64>,
        threshold: f64,
    },
}

fn dims<T: Real>(train: &[Vec<T>], test: &[Vec<T>]) -> Result<usize> {
    let d = train
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::TooFewSamples("empty training set".into()))?;
    for r in train.iter().chain(test) {
        if r.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                actual: r.len(),
            });
        }
    }
    Ok(d)
}

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y).as_f64().powi(2)).sum()
}

/// Neighbour indices sorted by distance, ties by index.
fn neighbours<T: Real>(train: &[Vec<T>], x: &[T], skip: Option<usize>) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, r)| (sq_dist(r, x), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d
}

/// Majority vote over the `k` nearest; among tied classes the one owning
/// the nearer neighbour wins.
pub fn knn_classify<T: Real>(train: &[Vec<T>], labels: &[String], k: usize, x: &[T]) -> String {
    let nn = neighbours(train, x, None);
    let mut votes: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (rank, &(_, i)) in nn.iter().take(k).enumerate() {
        let e = votes.entry(labels[i].as_str()).or_insert((0, rank));
        e.0 += 1;
    }
    votes
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(c, _)| c.to_string())
        .unwrap_or_default()
}

fn ols_fit<T: Real>(train: &[Vec<T>], y: &[f64]) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = train
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().map(|v| v.as_f64())).collect())
        .collect();
    lstsq(&Matrix::from_rows(&rows)?, y)
}

fn order_stat(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

struct Mahalanobis {
    mean: Vec<f64>,
    cov: Matrix<f64>,
}

impl Mahalanobis {
    fn fit<T: Real>(train: &[Vec<T>]) -> Result<Self> {
        let x = Matrix::from_rows(
            &train
                .iter()
                .map(|r| r.iter().map(|v| v.as_f64()).collect())
                .collect::<Vec<_>>(),
        )?;
        let mean = x.column_means();
        let xc = x.centered(&mean);
        let d = x.cols();
        let denom = (x.rows().max(2) - 1) as f64;
        let mut cov = xc.transpose().matmul(&xc);
        for v in cov.as_mut_slice() {
            *v /= denom;
        }
        let trace: f64 = (0..d).map(|i| cov[(i, i)]).sum();
        let ridge = 1e-6 * trace / d as f64;
        for i in 0..d {
            cov[(i, i)] += if ridge > 0.0 { ridge } else { 1e-12 };
        }
        Ok(Self { mean, cov })
    }

    fn score<T: Real>(&self, x: &[T]) -> Result<f64> {
        let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v.as_f64() - m).collect();
        let sol = cholesky_solve(&self.cov, &diff).map_err(|_| Error::SingularCovariance)?;
        let d2: f64 = diff.iter().zip(&sol).map(|(a, b)| a * b).sum();
        if !d2.is_finite() {
            return Err(Error::SingularCovariance);
        }
        Ok(d2.max(0.0).sqrt())
    }
}

fn mean_knn_distance<T: Real>(train: &[Vec<T>], x: &[T], k: usize, skip: Option<usize>) -> f64 {
    let nn = neighbours(train, x, skip);
    let k = k.min(nn.len()).max(1);
    nn.iter().take(k).map(|(d, _)| d.sqrt()).sum::<f64>() / k as f64
}

fn response(labels: &[Label]) -> Result<Vec<f64>> {
    labels
        .iter()
        .map(|l| {
            l.as_value()
                .ok_or_else(|| Error::InvalidLabel(format!("regression baseline got {l:?}")))
        })
        .collect()
}

/// Fits on `(train, labels)` and predicts `test`.
pub fn fit_predict<T: Real>(
    spec: &BaselineSpec,
    train: &[Vec<T>],
    labels: &[Label],
    test: &[Vec<T>],
) -> Result<BaselineOutput> {
    spec.validate()?;
    dims(train, test)?;
    if labels.len() != train.len() {
        return Err(Error::LengthMismatch(format!(
            "{} training rows, {} labels",
            train.len(),
            labels.len()
        )));
    }
    match *spec {
        BaselineSpec::KnnClassifier { k } => {
            let classes: Vec<String> = labels
                .iter()
                .map(|l| {
                    l.as_class()
                        .map(str::to_string)
                        .ok_or_else(|| Error::InvalidLabel(format!("KNN got {l:?}")))
                })
                .collect::<Result<_>>()?;
            Ok(BaselineOutput::Classes {
                labels: test.iter().map(|x| knn_classify(train, &classes, k, x)).collect(),
            })
        }
        BaselineSpec::LinearRegression => {
            let beta = ols_fit(train, &response(labels)?)?;
            Ok(BaselineOutput::Values {
                values: test
                    .iter()
                    .map(|x| beta[0] + x.iter().zip(&beta[1..]).map(|(v, b)| v.as_f64() * b).sum::<f64>())
                    .collect(),
            })
        }
        BaselineSpec::PlsRegression { n_latent } => {
            let y: Vec<T> = response(labels)?.into_iter().map(T::lit).collect();
            let cap = (train.len() - 1).min(train[0].len());
            let m = pls_fit(train, &y, n_latent.min(cap))?;
            Ok(BaselineOutput::Values {
                values: test
                    .iter()
                    .map(|x| m.predict(x).map(|v| v.as_f64()))
                    .collect::<Result<_>>()?,
            })
        }
        BaselineSpec::OneClassMahalanobis { quantile } => {
            let normals = normal_rows(train, labels)?;
            let model = Mahalanobis::fit(&normals)?;
            let own = normals.iter().map(|x| model.score(x)).collect::<Result<Vec<_>>>()?;
            let threshold = order_stat(own, quantile);
            let scores = test.iter().map(|x| model.score(x)).collect::<Result<Vec<_>>>()?;
            Ok(anomaly_output(scores, threshold))
        }
        BaselineSpec::OneClassKnnDistance { k, quantile } => {
            let normals = normal_rows(train, labels)?;
            if normals.len() < 2 {
                return Err(Error::TooFewSamples("one-class kNN needs ≥ 2 normal samples".into()));
            }
            let own = (0..normals.len())
                .map(|i| mean_knn_distance(&normals, &normals[i], k, Some(i)))
                .collect();
            let threshold = order_stat(own, quantile);
            let scores = test.iter().map(|x| mean_knn_distance(&normals, x, k, None)).collect();
            Ok(anomaly_output(scores, threshold))
        }
    }
}

fn normal_rows<T: Real>(train: &[Vec<T>], labels: &[Label]) -> Result<Vec<Vec<T>>> {
    let mut out = Vec::new();
    for (r, l) in train.iter().zip(labels) {
        match l.as_flag() {
            Some(true) => out.push(r.clone()),
            Some(false) => {}
            None => return Err(Error::InvalidLabel(format!("one-class baseline got {l:?}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::TooFewSamples("no normal samples to fit".into()));
    }
    Ok(out)
}

fn anomaly_output(scores: Vec<f64>, threshold: f64) -> BaselineOutput {
    BaselineOutput::Anomaly {
        flags: scores.iter().map(|&s| s <= threshold).collect(),
        scores,
        threshold,
    }
}
