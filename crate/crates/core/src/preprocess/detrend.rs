//! Polynomial detrending in wavelength.

use crate::error::{Error, Result};
use crate::linalg::{lstsq, Matrix};
use crate::model::Spectrum;
use crate::scalar::Real;

/// Vandermonde basis on the grid mapped to [-1, 1], columns `1, x, .., x^order`.
pub fn scaled_basis<T: Real>(grid: &[T], order: usize) -> Matrix<T> {
    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    let mid = (lo + hi) / T::lit(2.0);
    let half = (hi - lo) / T::lit(2.0);
    let mut a = Matrix::zeros(grid.len(), order + 1);
    for (i, &w) in grid.iter().enumerate() {
        let x = (w - mid) / half;
        let mut p = T::one();
        for k in 0..=order {
            a[(i, k)] = p;
            p = p * x;
        }
    }
    a
}

/// Subtracts the least-squares polynomial of degree `order` (1 or 2).
pub fn detrend<T: Real>(s: &Spectrum<T>, order: u8) -> Result<Spectrum<T>> {
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidParameter(format!(
            "detrend order must be 1 or 2, got {order}"
        )));
    }
    let k = order as usize;
    if s.len() <= k + 1 {
        return Err(Error::TooFewSamples(format!(
            "detrend of order {order} needs more than {} points",
            k + 1
        )));
    }
    let a = scaled_basis(s.wavelengths(), k);
    let coef = lstsq(&a, s.intensities())?;
    let fit = a.matvec(&coef);
    s.with_intensities(s.intensities().iter().zip(&fit).map(|(&y, &f)| y - f).collect())
}
