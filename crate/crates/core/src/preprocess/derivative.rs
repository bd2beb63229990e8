//! Finite-difference derivatives on a uniform grid.
//!
//! Interior points use central differences. The two end points use
//! one-sided formulas of the same (second) order of accuracy, so the output
//! keeps the input length and is exact on quadratics.

use crate::error::{Error, Result};
use crate::model::Spectrum;
use crate::scalar::Real;

pub fn derivative<T: Real>(s: &Spectrum<T>, order: u8) -> Result<Spectrum<T>> {
    let n = s.len();
    match order {
        1 if n >= 3 => {}
        2 if n >= 4 => {}
        1 | 2 => {
            return Err(Error::TooFewSamples(format!(
                "derivative of order {order} needs more than {n} points"
            )))
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "derivative order must be 1 or 2, got {order}"
            )))
        }
    }
    let h = s.require_uniform("finite-difference derivative")?;
    let y = s.intensities();
    let c = |v: f64| T::lit(v);
    let mut out = vec![T::zero(); n];
    if order == 1 {
        let two_h = c(2.0) * h;
        for i in 1..n - 1 {
            out[i] = (y[i + 1] - y[i - 1]) / two_h;
        }
        out[0] = (c(-3.0) * y[0] + c(4.0) * y[1] - y[2]) / two_h;
        out[n - 1] = (c(3.0) * y[n - 1] - c(4.0) * y[n - 2] + y[n - 3]) / two_h;
    } else {
        let h2 = h * h;
        for i in 1..n - 1 {
            out[i] = (y[i + 1] - c(2.0) * y[i] + y[i - 1]) / h2;
        }
        out[0] = (c(2.0) * y[0] - c(5.0) * y[1] + c(4.0) * y[2] - y[3]) / h2;
        out[n - 1] = (c(2.0) * y[n - 1] - c(5.0) * y[n - 2] + c(4.0) * y[n - 3] - y[n - 4]) / h2;
    }
    s.with_intensities(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(f: impl Fn(f64) -> f64) -> Spectrum {
        let g: Vec<f64> = (0..20).map(|i| 1100.0 + i as f64).collect();
        let y = g.iter().map(|&x| f(x)).collect();
        Spectrum::new("d", g, y).unwrap()
    }

    #[test]
    fn ramp_and_parabola() {
        let d = derivative(&sp(|x| 2.0 * x), 1).unwrap();
        assert!(d.intensities().iter().all(|v| (v - 2.0).abs() < 1e-9));
        let dd = derivative(&sp(|x| x * x), 2).unwrap();
        assert!(dd.intensities().iter().all(|v| (v - 2.0).abs() < 1e-6));
        let d1 = derivative(&sp(|x| (x - 1110.0).powi(2)), 1).unwrap();
        for (i, v) in d1.intensities().iter().enumerate() {
            assert!((v - 2.0 * (i as f64 - 10.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let s = Spectrum::new("n", vec![1.0, 2.0, 4.0, 5.0, 6.0], vec![0.0; 5]).unwrap();
        assert!(matches!(derivative(&s, 1), Err(Error::NonUniformGrid(_))));
        assert!(derivative(&sp(|x| x), 3).is_err());
    }
}
