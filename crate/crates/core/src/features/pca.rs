//! Principal component analysis on column-centred data.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Real;

/// Eigenvalues below this fraction of the largest are treated as zero rank.
const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PcaModel<T: Real = f64> {
    pub mean: Vec<T>,
    /// `dim × k`, one unit loading vector per column.
    pub loadings: Matrix<T>,
    /// Covariance eigenvalues, descending.
    pub variances: Vec<T>,
    /// Trace of the covariance matrix.
    pub total_variance: T,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Real> PcaModel<T> {
    pub fn n_components(&self) -> usize {
        self.variances.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<T> {
        self.variances.iter().map(|&v| v / self.total_variance).collect()
    }
}

fn check_rows<T: Real>(rows: &[Vec<T>]) -> Result<usize> {
    let dim = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            actual: r.len(),
        });
    }
    Ok(dim)
}

/// Fits `n_components` principal axes of `rows` (one sample per row).
///
/// The eigenproblem is solved on whichever of the covariance `XᵀX/(n−1)` or
/// the Gram matrix `XXᵀ/(n−1)` is smaller. Each loading is oriented so its
/// largest-magnitude entry is positive. Components beyond the numerical rank
/// are dropped with a warning.
pub fn pca_fit<T: Real>(rows: &[Vec<T>], n_components: usize) -> Result<PcaModel<T>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFewSamples(format!("PCA needs ≥ 2 samples, got {n}")));
    }
    let dim = check_rows(rows)?;
    let max_k = (n - 1).min(dim);
    if n_components < 1 || n_components > max_k {
        return Err(Error::InvalidParameter(format!(
            "PCA n_components must be in 1..={max_k} for {n} samples of dimension {dim}, got {n_components}"
        )));
    }
    let x = Matrix::from_rows(rows)?;
    let mean = x.column_means();
    let xc = x.centered(&mean);
    let denom = T::from_usize_lossy(n - 1);

    let (values, vectors) = if dim <= n {
        let mut c = xc.transpose().matmul(&xc);
        for v in c.as_mut_slice() {
            *v /= denom;
        }
        symmetric_eigen(&c)
    } else {
        let mut g = xc.matmul(&xc.transpose());
        for v in g.as_mut_slice() {
            *v /= denom;
        }
        let (vals, gv) = symmetric_eigen(&g);
        // map Gram eigenvectors to covariance eigenvectors: u = Xᵀv / ‖Xᵀv‖
        let mut u = Matrix::zeros(dim, vals.len());
        for k in 0..vals.len() {
            let col = xc.tmatvec(&gv.col(k));
            let norm = col.iter().map(|&a| a * a).sum::<T>().sqrt();
            if norm > T::zero() {
                for j in 0..dim {
                    u[(j, k)] = col[j] / norm;
                }
            }
        }
        (vals, u)
    };

    let total_variance: T = (0..dim)
        .map(|j| (0..n).map(|i| xc[(i, j)] * xc[(i, j)]).sum::<T>())
        .sum::<T>()
        / denom;
    let top = values.first().copied().unwrap_or(T::zero()).max(T::zero());
    let tol = top * T::lit(RANK_RTOL);
    let rank = values.iter().take_while(|&&v| v > tol && top > T::zero()).count();
    let mut warnings = Vec::new();
    let k = if n_components > rank {
        let msg =
            format!("requested {n_components} principal components but data has numerical rank {rank}; keeping {rank}");
        warn!("{msg}");
        warnings.push(msg);
        rank
    } else {
        n_components
    };
    if k == 0 {
        return Err(Error::ConstantSpectrum(
            "all samples identical; PCA has no component".into(),
        ));
    }

    let mut loadings = Matrix::zeros(dim, k);
    for c in 0..k {
        let mut col = vectors.col(c);
        // orthonormalise against earlier columns to absorb rounding
        for prev in 0..c {
            let p = loadings.col(prev);
            let d: T = col.iter().zip(&p).map(|(&a, &b)| a * b).sum();
            for (a, &b) in col.iter_mut().zip(&p) {
                *a -= d * b;
            }
        }
        let norm = col.iter().map(|&a| a * a).sum::<T>().sqrt();
        let pivot = col
            .iter()
            .copied()
            .fold(T::zero(), |best, v| if v.abs() > best.abs() { v } else { best });
        let sign = if pivot < T::zero() { -T::one() } else { T::one() };
        for j in 0..dim {
            loadings[(j, c)] = sign * col[j] / norm;
        }
    }
    Ok(PcaModel {
        mean,
        loadings,
        variances: values[..k].iter().map(|&v| v.max(T::zero())).collect(),
        total_variance,
        warnings,
    })
}

/// Scores `(x − mean)·U` for each row.
pub fn pca_transform<T: Real>(model: &PcaModel<T>, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    rows.iter()
        .map(|r| {
            if r.len() != model.dim() {
                return Err(Error::DimMismatch {
                    expected: model.dim(),
                    actual: r.len(),
                });
            }
            let centred: Vec<T> = r.iter().zip(&model.mean).map(|(&a, &m)| a - m).collect();
            Ok(model.loadings.tmatvec(&centred))
        })
        .collect()
}

/// Maps scores back to the original space.
pub fn pca_inverse<T: Real>(model: &PcaModel<T>, scores: &[Vec<T>]) -> Vec<Vec<T>> {
    scores
        .iter()
        .map(|s| {
            let mut x = model.loadings.matvec(s);
            for (a, &m) in x.iter_mut().zip(&model.mean) {
                *a += m;
            }
            x
        })
        .collect()
}
