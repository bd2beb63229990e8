//! Savitzky-Golay smoothing and differentiation.
//!
//! Interior points use the fixed convolution weights of a centred window of
//! `2m + 1` samples. Points closer than `m` to either end are fitted on the
//! truncated window that actually exists (widened toward the interior to
//! at least `degree + 1` samples), so no data is invented past the ends.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Matrix};
use crate::model::Spectrum;
use crate::scalar::Real;

/// Weights `c` such that `Σ c_j y_j` is the `deriv`-th derivative (per
/// sample index) at offset 0 of the degree-`degree` least-squares
/// polynomial through samples at integer `offsets`.
pub fn savgol_weights<T: Real>(offsets: &[i64], degree: usize, deriv: usize) -> Result<Vec<T>> {
    let k = degree + 1;
    if offsets.len() < k {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot determine a degree-{degree} polynomial",
            offsets.len()
        )));
    }
    if deriv > degree {
        return Ok(vec![T::zero(); offsets.len()]);
    }
    let h = offsets.iter().map(|o| o.unsigned_abs()).max().unwrap_or(1).max(1) as f64;
    let h_t = T::lit(h);
    // scaled Vandermonde rows
    let rows: Vec<Vec<T>> = offsets
        .iter()
        .map(|&o| {
            let x = T::lit(o as f64) / h_t;
            let mut v = Vec::with_capacity(k);
            let mut p = T::one();
            for _ in 0..k {
                v.push(p);
                p = p * x;
            }
            v
        })
        .collect();
    let mut gram = Matrix::<T>::zeros(k, k);
    for r in &rows {
        for a in 0..k {
            for b in 0..k {
                gram[(a, b)] += r[a] * r[b];
            }
        }
    }
    let mut e = vec![T::zero(); k];
    e[deriv] = T::one();
    let g = cholesky_solve(&gram, &e)?;
    let factorial: f64 = (1..=deriv).map(|i| i as f64).product();
    let scale = T::lit(factorial) / h_t.powi(deriv as i32);
    Ok(rows
        .iter()
        .map(|r| r.iter().zip(&g).map(|(&a, &b)| a * b).sum::<T>() * scale)
        .collect())
}

/// Savitzky-Golay filter with half window `m` (window `2m + 1`).
///
/// `deriv_order` 1 and 2 return derivatives in intensity per nm (per nm²),
/// which needs a uniform grid.
pub fn savitzky_golay<T: Real>(s: &Spectrum<T>, m: usize, degree: usize, deriv_order: u8) -> Result<Spectrum<T>> {
    let window = 2 * m + 1;
    if degree < 1 || window < degree + 2 || deriv_order > 2 || deriv_order as usize > degree {
        return Err(Error::InvalidParameter(format!(
            "Savitzky-Golay needs degree ≥ 1, 2m+1 ≥ degree+2, deriv_order ≤ min(2, degree); got m={m}, degree={degree}, deriv_order={deriv_order}"
        )));
    }
    let n = s.len();
    if window > n {
        return Err(Error::WindowTooLarge { window, len: n });
    }
    let step_scale = if deriv_order > 0 {
        let dl = s.require_uniform("Savitzky-Golay derivative")?;
        dl.powi(deriv_order as i32)
    } else {
        T::one()
    };
    let deriv = deriv_order as usize;
    let y = s.intensities();
    let mi = m as i64;
    let centred: Vec<i64> = (-mi..=mi).collect();
    let interior = savgol_weights::<T>(&centred, degree, deriv)?;

    let mut out = vec![T::zero(); n];
    for i in 0..n {
        let v: T = if i >= m && i + m < n {
            interior.iter().zip(&y[i - m..=i + m]).map(|(&c, &v)| c * v).sum()
        } else {
            let mut lo = i.saturating_sub(m);
            let mut hi = (i + m).min(n - 1);
            while hi - lo < degree {
                if lo > 0 && (hi == n - 1 || i - lo <= hi - i) {
                    lo -= 1;
                } else {
                    hi += 1;
                }
            }
            let offsets: Vec<i64> = (lo..=hi).map(|j| j as i64 - i as i64).collect();
            let w = savgol_weights::<T>(&offsets, degree, deriv)?;
            w.iter().zip(&y[lo..=hi]).map(|(&c, &v)| c * v).sum()
        };
        out[i] = v / step_scale;
    }
    s.with_intensities(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn spectrum(f: impl Fn(f64) -> f64, n: usize, step: f64) -> Spectrum {
        let g: Vec<f64> = (0..n).map(|i| 900.0 + i as f64 * step).collect();
        let y = g.iter().map(|&x| f(x)).collect();
        Spectrum::new("t", g, y).unwrap()
    }

    #[test]
    fn classic_five_point_quadratic_weights() {
        let w: Vec<f64> = savgol_weights(&[-2, -1, 0, 1, 2], 2, 0).unwrap();
        let expect = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|v| v / 35.0);
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn reproduces_quadratic_for_any_window() {
        for m in 2..9 {
            let s = spectrum(|x| 0.3 + 0.01 * (x - 950.0) - 2e-4 * (x - 950.0).powi(2), 60, 1.0);
            let out = savitzky_golay(&s, m, 2, 0).unwrap();
            for (a, b) in out.intensities().iter().zip(s.intensities()) {
                assert!((a - b).abs() < 1e-8, "m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn first_derivative_of_ramp_is_slope() {
        let s = spectrum(|x| 4.0 - 0.75 * x, 40, 2.0);
        let d = savitzky_golay(&s, 3, 2, 1).unwrap();
        for v in d.intensities() {
            assert!((v + 0.75).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn smoothing_reduces_white_noise_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = Spectrum::new("n", g, y.clone()).unwrap();
        let out = savitzky_golay(&s, 5, 2, 0).unwrap();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        assert!(var(out.intensities()) < var(&y));
    }

    #[test]
    fn window_larger_than_spectrum() {
        let s = spectrum(|x| x, 9, 1.0);
        assert!(matches!(
            savitzky_golay(&s, 5, 2, 0),
            Err(Error::WindowTooLarge { window: 11, len: 9 })
        ));
    }

    #[test]
    fn derivative_requires_uniform_grid() {
        let s = Spectrum::new("u", vec![1.0, 2.0, 3.0, 5.0, 6.0, 7.0, 8.0], vec![1.0; 7]).unwrap();
        assert!(savitzky_golay(&s, 2, 2, 0).is_ok());
        assert!(matches!(savitzky_golay(&s, 2, 2, 1), Err(Error::NonUniformGrid(_))));
    }
}
