//! Small dense linear algebra used by the kernels.
//!
//! Matrices here are at most a few hundred rows wide (spectral batches are
//! capped at tens of samples), so straightforward O(n³) routines are enough.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::LengthMismatch(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ · v`
    pub fn tmatvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "tmatvec shape");
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn column_means(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (acc, &x) in m.iter_mut().zip(self.row(i)) {
                *acc += x;
            }
        }
        let n = T::from_usize_lossy(self.rows.max(1));
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    pub fn centered(&self, means: &[T]) -> Self {
        let mut c = self.clone();
        for i in 0..c.rows {
            for (x, &m) in c.row_mut(i).iter_mut().zip(means) {
                *x -= m;
            }
        }
        c
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
pub fn cholesky_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let l = cholesky(a)?;
    let n = a.rows();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Lower Cholesky factor of an SPD matrix.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::SingularSystem(format!(
                "matrix not positive definite at pivot {j}"
            )));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves a general square system with partial pivoting.
pub fn lu_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::DimMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.as_slice().iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
    for c in 0..n {
        let (p, pv) =
            (c..n)
                .map(|r| (r, m[(r, c)].abs()))
                .fold((c, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pv > tiny) {
            return Err(Error::SingularSystem(format!("zero pivot in column {c}")));
        }
        if p != c {
            for j in 0..n {
                let tmp = m[(c, j)];
                m[(c, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            x.swap(c, p);
        }
        for r in c + 1..n {
            let f = m[(r, c)] / m[(c, c)];
            if f == T::zero() {
                continue;
            }
            for j in c..n {
                let v = m[(c, j)];
                m[(r, j)] -= f * v;
            }
            let xc = x[c];
            x[r] -= f * xc;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}

/// Least-squares solution of `A x ≈ b` (rows ≥ cols) via Householder QR.
pub fn lstsq<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimMismatch {
            expected: m,
            actual: b.len(),
        });
    }
    if m < n {
        return Err(Error::SingularSystem(format!(
            "underdetermined least squares ({m} equations, {n} unknowns)"
        )));
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    let two = T::lit(2.0);
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        for j in k..n {
            let s: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            let f = two * s / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let s: T = (k..m).map(|i| v[i - k] * y[i]).sum();
        let f = two * s / vnorm2;
        for i in k..m {
            y[i] -= f * v[i - k];
        }
    }
    let diag_max = (0..n).fold(T::zero(), |acc, i| acc.max(r[(i, i)].abs()));
    let tol = diag_max * T::epsilon() * T::from_usize_lossy(m.max(n));
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        if r[(i, i)].abs() <= tol {
            return Err(Error::SingularSystem(format!(
                "rank-deficient design matrix (column {i})"
            )));
        }
        let mut s = y[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    Ok(x)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as the columns of the second value.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let total: T = m.as_slice().iter().map(|&x| x * x).sum();
    let eps = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off <= eps {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    (values, vectors)
}

/// Symmetric banded system solver (LDLᵀ) for the AsLS normal equations.
///
/// `bands[d][i]` holds `A[i][i+d]` for `d = 0..=bandwidth`.
pub fn banded_spd_solve<T: Real>(bands: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    let w = bands.len() - 1;
    // l[d][i] = L[i+d][i], unit diagonal; dvals[i] = D[i]
    let mut l = vec![vec![T::zero(); n]; w + 1];
    let mut dvals = vec![T::zero(); n];
    for j in 0..n {
        let mut dj = bands[0][j];
        for k in j.saturating_sub(w)..j {
            let ljk = l[j - k][k];
            dj -= ljk * ljk * dvals[k];
        }
        if !(dj > T::zero()) || !dj.is_finite() {
            return Err(Error::SingularSystem(format!(
                "banded system lost positive definiteness at row {j}"
            )));
        }
        dvals[j] = dj;
        for i in j + 1..(j + w + 1).min(n) {
            let mut s = bands[i - j][j];
            for k in i.saturating_sub(w)..j {
                s -= l[i - k][k] * l[j - k][k] * dvals[k];
            }
            l[i - j][j] = s / dj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in i.saturating_sub(w)..i {
            let v = y[k];
            y[i] -= l[i - k][k] * v;
        }
    }
    for i in 0..n {
        y[i] /= dvals[i];
    }
    for i in (0..n).rev() {
        for k in i + 1..(i + w + 1).min(n) {
            let v = y[k];
            y[i] -= l[k - i][i] * v;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("non-finite banded solution".into()));
    }
    Ok(y)
}
