//! PLS1 by NIPALS with loading deflation.
//!
//! Per component: `w = Xᵀy/‖Xᵀy‖`, `t = Xw`, `p = Xᵀt/(tᵀt)`,
//! `c = yᵀt/(tᵀt)`, then `X ← X − t pᵀ` and `y ← y − t c`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, Matrix};
use crate::scalar::{dot, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlsModel<T: Real = f64> {
    pub x_mean: Vec<T>,
    pub y_mean: T,
    /// Weight vectors `w`, one per component.
    pub weights: Vec<Vec<T>>,
    /// X loadings `p`.
    pub loadings: Vec<Vec<T>>,
    /// y loadings `c` (the `q` of a PLS1 model).
    pub y_loadings: Vec<T>,
    /// Training scores `t`, one vector of length n per component.
    pub scores: Vec<Vec<T>>,
    /// Training response scores `u = y_a / c_a`; informational only.
    pub y_scores: Vec<Vec<T>>,
    /// Regression vector `B = W (PᵀW)⁻¹ c` on centred inputs.
    pub coefficients: Vec<T>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Real> PlsModel<T> {
    pub fn n_latent(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.x_mean.len()
    }

    fn check(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        self.check(x)?;
        Ok(self.y_mean
            + x.iter()
                .zip(&self.x_mean)
                .zip(&self.coefficients)
                .map(|((&a, &m), &b)| (a - m) * b)
                .sum::<T>())
    }

    /// Latent scores of a new sample, deflating through each component.
    pub fn transform(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x)?;
        let mut r: Vec<T> = x.iter().zip(&self.x_mean).map(|(&a, &m)| a - m).collect();
        let mut out = Vec::with_capacity(self.n_latent());
        for (w, p) in self.weights.iter().zip(&self.loadings) {
            let t = dot(&r, w);
            for (a, &pj) in r.iter_mut().zip(p) {
                *a -= t * pj;
            }
            out.push(t);
        }
        Ok(out)
    }
}

pub fn pls_fit<T: Real>(rows: &[Vec<T>], y: &[T], n_latent: usize) -> Result<PlsModel<T>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFewSamples(format!("PLS needs ≥ 2 samples, got {n}")));
    }
    if y.len() != n {
        return Err(Error::DimMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    let x = Matrix::from_rows(rows)?;
    let dim = x.cols();
    let max_a = (n - 1).min(dim);
    if n_latent < 1 || n_latent > max_a {
        return Err(Error::InvalidParameter(format!(
            "PLS n_latent must be in 1..={max_a}, got {n_latent}"
        )));
    }
    let x_mean = x.column_means();
    let mut xr = x.centered(&x_mean);
    let y_mean = y.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let mut yr: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let y_scale = yr.iter().map(|&v| v * v).sum::<T>().sqrt();
    if !(y_scale > T::epsilon() * y_mean.abs().max(T::one()) * T::from_usize_lossy(n)) {
        return Err(Error::DegenerateResponse("response is constant".into()));
    }
    let x_scale = xr.as_slice().iter().map(|&v| v * v).sum::<T>().sqrt();

    let mut model = PlsModel {
        x_mean,
        y_mean,
        weights: Vec::new(),
        loadings: Vec::new(),
        y_loadings: Vec::new(),
        scores: Vec::new(),
        y_scores: Vec::new(),
        coefficients: vec![T::zero(); dim],
        warnings: Vec::new(),
    };
    for a in 0..n_latent {
        let xty = xr.tmatvec(&yr);
        let norm = xty.iter().map(|&v| v * v).sum::<T>().sqrt();
        if !(norm > T::lit(1e-12) * x_scale * y_scale) {
            if a == 0 {
                return Err(Error::DegenerateResponse(
                    "response is orthogonal to every predictor".into(),
                ));
            }
            let msg = format!("PLS stopped after {a} of {n_latent} components: residual response exhausted");
            warn!("{msg}");
            model.warnings.push(msg);
            break;
        }
        let w: Vec<T> = xty.iter().map(|&v| v / norm).collect();
        let t = xr.matvec(&w);
        let tt = dot(&t, &t);
        let p: Vec<T> = xr.tmatvec(&t).iter().map(|&v| v / tt).collect();
        let c = dot(&yr, &t) / tt;
        let u: Vec<T> = yr.iter().map(|&v| v / c).collect();
        for i in 0..n {
            for j in 0..dim {
                xr[(i, j)] -= t[i] * p[j];
            }
            yr[i] -= t[i] * c;
        }
        model.weights.push(w);
        model.loadings.push(p);
        model.y_loadings.push(c);
        model.scores.push(t);
        model.y_scores.push(u);
    }

    // B = W (PᵀW)⁻¹ c
    let k = model.n_latent();
    let mut ptw = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            ptw[(i, j)] = dot(&model.loadings[i], &model.weights[j]);
        }
    }
    let z = lu_solve(&ptw, &model.y_loadings)?;
    for (w, &zj) in model.weights.iter().zip(&z) {
        for (b, &wj) in model.coefficients.iter_mut().zip(w) {
            *b += wj * zj;
        }
    }
    Ok(model)
}
