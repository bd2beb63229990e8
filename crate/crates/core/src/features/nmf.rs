//! Non-negative matrix factorisation `X ≈ W H` by Lee-Seung multiplicative
//! updates on the Frobenius objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NmfModel<T: Real = f64> {
    /// `rank × dim` basis spectra.
    pub basis: Matrix<T>,
    pub iters: usize,
    pub seed: u64,
    /// ‖X − WH‖²_F after every half-update (W then H).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective: Vec<T>,
}

fn check_non_negative<T: Real>(rows: &[Vec<T>]) -> Result<Matrix<T>> {
    for (i, r) in rows.iter().enumerate() {
        if let Some(j) = r.iter().position(|&v| v < T::zero()) {
            return Err(Error::NegativeInput { row: i, col: j });
        }
    }
    Matrix::from_rows(rows)
}

fn frobenius<T: Real>(x: &Matrix<T>, w: &Matrix<T>, h: &Matrix<T>) -> T {
    let wh = w.matmul(h);
    x.as_slice()
        .iter()
        .zip(wh.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum()
}

fn uniform_init<T: Real>(rows: usize, cols: usize, scale: T, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let data = (0..rows * cols)
        .map(|_| T::lit(rng.random_range(0.01..1.0)) * scale)
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// `W ← W ⊙ (X Hᵀ) ⊘ (W H Hᵀ)`; entries with a zero denominator are left as is.
fn update_w<T: Real>(x: &Matrix<T>, w: &mut Matrix<T>, h: &Matrix<T>) {
    let ht = h.transpose();
    let num = x.matmul(&ht);
    let den = w.matmul(&h.matmul(&ht));
    for ((wv, &n), &d) in w.as_mut_slice().iter_mut().zip(num.as_slice()).zip(den.as_slice()) {
        if d > T::zero() {
            *wv = *wv * n / d;
        }
    }
}

/// `H ← H ⊙ (Wᵀ X) ⊘ (Wᵀ W H)`.
fn update_h<T: Real>(x: &Matrix<T>, w: &Matrix<T>, h: &mut Matrix<T>) {
    let wt = w.transpose();
    let num = wt.matmul(x);
    let den = wt.matmul(w).matmul(h);
    for ((hv, &n), &d) in h.as_mut_slice().iter_mut().zip(num.as_slice()).zip(den.as_slice()) {
        if d > T::zero() {
            *hv = *hv * n / d;
        }
    }
}

/// Fits `rank` basis spectra and returns the model with the coefficient rows.
pub fn nmf_fit<T: Real>(rows: &[Vec<T>], rank: usize, iters: usize, seed: u64) -> Result<(NmfModel<T>, Vec<Vec<T>>)> {
    let x = check_non_negative(rows)?;
    let (n, d) = (x.rows(), x.cols());
    if rank < 1 || rank > n.min(d) || iters < 1 {
        return Err(Error::InvalidParameter(format!(
            "NMF needs 1 ≤ rank ≤ {} and iters ≥ 1, got rank {rank}, iters {iters}",
            n.min(d)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = x.as_slice().iter().copied().sum::<T>() / T::from_usize_lossy(n * d);
    let scale = (mean / T::from_usize_lossy(rank)).sqrt().max(T::epsilon());
    let mut w = uniform_init(n, rank, scale, &mut rng);
    let mut h = uniform_init(rank, d, scale, &mut rng);
    let mut objective = Vec::with_capacity(2 * iters + 1);
    objective.push(frobenius(&x, &w, &h));
    for _ in 0..iters {
        update_w(&x, &mut w, &h);
        objective.push(frobenius(&x, &w, &h));
        update_h(&x, &w, &mut h);
        objective.push(frobenius(&x, &w, &h));
    }
    Ok((
        NmfModel {
            basis: h,
            iters,
            seed,
            objective,
        },
        w.to_rows(),
    ))
}

/// Coefficients of new rows against the fixed basis.
pub fn nmf_transform<T: Real>(model: &NmfModel<T>, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let x = check_non_negative(rows)?;
    if x.cols() != model.basis.cols() {
        return Err(Error::DimMismatch {
            expected: model.basis.cols(),
            actual: x.cols(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mean = x.as_slice().iter().copied().sum::<T>() / T::from_usize_lossy(x.rows() * x.cols()).max(T::one());
    let scale = (mean / T::from_usize_lossy(model.basis.rows()))
        .sqrt()
        .max(T::epsilon());
    let mut w = uniform_init(x.rows(), model.basis.rows(), scale, &mut rng);
    for _ in 0..model.iters {
        update_w(&x, &mut w, &model.basis);
    }
    Ok(w.to_rows())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_product_is_recovered() {
        let a: Vec<f64> = (0..12).map(|i| 0.5 + i as f64 * 0.3).collect();
        let b: Vec<f64> = (0..30).map(|j| 1.0 + ((j as f64) / 4.0).sin().abs()).collect();
        let rows: Vec<Vec<f64>> = a.iter().map(|&ai| b.iter().map(|&bj| ai * bj).collect()).collect();
        let (m, w) = nmf_fit(&rows, 1, 200, 3).unwrap();
        let norm: f64 = rows.iter().flatten().map(|v| v * v).sum();
        let err = *m.objective.last().unwrap();
        assert!((err / norm).sqrt() < 1e-3);
        assert_eq!(w.len(), 12);
        // rounding floor: relative to the starting objective
        let floor = 1e-12 * m.objective[0];
        for pair in m.objective.windows(2) {
            assert!(pair[1] <= pair[0] + floor, "{} > {}", pair[1], pair[0]);
        }
    }

    #[test]
    fn negative_entry_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![0.5, -0.1]];
        assert!(matches!(
            nmf_fit(&rows, 1, 10, 0),
            Err(Error::NegativeInput { row: 1, col: 1 })
        ));
    }
}
