//! Continuous wavelet transform with the Ricker (Mexican hat) wavelet.
//!
//! `W(a, b) = Σᵢ y(λᵢ) a^{-1/2} ψ((λᵢ − b)/a) Δλᵢ` evaluated at every grid
//! point `b`, where `Δλᵢ` are trapezoid widths and scales are in nm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Spectrum;
use crate::scalar::Real;

/// Minimum spectrum length for the transform.
pub const MIN_CWT_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wavelet {
    #[default]
    Ricker,
}

/// Unit-energy Ricker wavelet at `t`.
pub fn ricker<T: Real>(t: T) -> T {
    let norm = T::lit(2.0) / (T::lit(3.0).sqrt() * T::PI().powf(T::lit(0.25)));
    let t2 = t * t;
    norm * (T::one() - t2) * (-t2 / T::lit(2.0)).exp()
}

fn quadrature_widths<T: Real>(grid: &[T]) -> Vec<T> {
    let n = grid.len();
    let half = T::lit(0.5);
    (0..n)
        .map(|i| {
            let lo = if i == 0 { grid[0] } else { grid[i - 1] };
            let hi = if i + 1 == n { grid[n - 1] } else { grid[i + 1] };
            (hi - lo) * half
        })
        .collect()
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() || scales.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidParameter(
            "CWT scales must be a non-empty list of positive numbers".into(),
        ));
    }
    Ok(())
}

/// Coefficient matrix, one row per scale and one column per grid point.
pub fn cwt<T: Real>(s: &Spectrum<T>, scales: &[f64], wavelet: Wavelet) -> Result<Vec<Vec<T>>> {
    check_scales(scales)?;
    if s.len() < MIN_CWT_LEN {
        return Err(Error::TooFewSamples(format!(
            "CWT needs ≥ {MIN_CWT_LEN} points, got {}",
            s.len()
        )));
    }
    let Wavelet::Ricker = wavelet;
    let grid = s.wavelengths();
    let y = s.intensities();
    let dw = quadrature_widths(grid);
    let weighted: Vec<T> = y.iter().zip(&dw).map(|(&a, &b)| a * b).collect();
    Ok(scales
        .iter()
        .map(|&a| {
            let a = T::lit(a);
            let inv_sqrt = T::one() / a.sqrt();
            grid.iter()
                .map(|&b| {
                    grid.iter()
                        .zip(&weighted)
                        .map(|(&l, &v)| v * ricker((l - b) / a))
                        .sum::<T>()
                        * inv_sqrt
                })
                .collect()
        })
        .collect())
}

/// Per scale: largest |W| and the wavelength where it occurs.
pub fn cwt_features<T: Real>(s: &Spectrum<T>, scales: &[f64], wavelet: Wavelet) -> Result<Vec<T>> {
    let coef = cwt(s, scales, wavelet)?;
    let grid = s.wavelengths();
    let mut out = Vec::with_capacity(2 * scales.len());
    for row in &coef {
        let (idx, mag) =
            row.iter().enumerate().fold(
                (0, T::zero()),
                |(bi, bm), (i, &v)| if v.abs() > bm { (i, v.abs()) } else { (bi, bm) },
            );
        out.push(mag);
        out.push(grid[idx]);
    }
    Ok(out)
}

pub fn cwt_feature_names(scales: &[f64]) -> Vec<String> {
    scales
        .iter()
        .flat_map(|a| [format!("cwt_max@{a}"), format!("cwt_loc@{a}")])
        .collect()
}
