//! Per-spectrum scaling: min-max normalisation and the standard normal variate.

use crate::error::{Error, Result};
use crate::model::Spectrum;
use crate::scalar::{mean, sample_std, Real};

/// Spread at or below this many ulps of the largest magnitude counts as
/// constant; smoothing a flat spectrum leaves rounding residue of that size.
const FLAT_ULPS: f64 = 1024.0;

fn flat_tolerance<T: Real>(y: &[T]) -> T {
    let scale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    T::lit(FLAT_ULPS) * T::epsilon() * scale
}

/// Rescales linearly so the minimum maps to 0 and the maximum to 1.
pub fn minmax_normalize<T: Real>(s: &Spectrum<T>) -> Result<Spectrum<T>> {
    let y = s.intensities();
    let lo = y.iter().copied().fold(T::infinity(), T::min);
    let hi = y.iter().copied().fold(T::neg_infinity(), T::max);
    let range = hi - lo;
    if !(range > flat_tolerance(y)) {
        return Err(Error::ConstantSpectrum(s.id().to_string()));
    }
    s.with_intensities(y.iter().map(|&v| (v - lo) / range).collect())
}

/// Centres on the spectrum mean and divides by its sample standard deviation.
pub fn snv<T: Real>(s: &Spectrum<T>) -> Result<Spectrum<T>> {
    let y = s.intensities();
    let m = mean(y);
    let sd = sample_std(y);
    if !(sd > flat_tolerance(y)) {
        return Err(Error::ConstantSpectrum(s.id().to_string()));
    }
    // second pass removes the rounding residue left in the mean
    let z: Vec<T> = y.iter().map(|&v| (v - m) / sd).collect();
    let m2 = mean(&z);
    let z: Vec<T> = z.iter().map(|&v| v - m2).collect();
    let sd2 = sample_std(&z);
    s.with_intensities(z.iter().map(|&v| v / sd2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(y: Vec<f64>) -> Spectrum {
        let g = (0..y.len()).map(|i| 1000.0 + i as f64).collect();
        Spectrum::new("s", g, y).unwrap()
    }

    #[test]
    fn minmax_formula_and_idempotence() {
        let s = sp(vec![0.0, 5.0, 10.0, 2.5, 7.5]);
        let a = minmax_normalize(&s).unwrap();
        assert_eq!(a.intensities(), &[0.0, 0.5, 1.0, 0.25, 0.75]);
        let b = minmax_normalize(&a).unwrap();
        assert_eq!(a.intensities(), b.intensities());
        assert!(matches!(
            minmax_normalize(&sp(vec![2.0; 6])),
            Err(Error::ConstantSpectrum(_))
        ));
    }

    #[test]
    fn snv_arithmetic_sequence() {
        let s = sp(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let out = snv(&s).unwrap();
        let sd = (2.5f64).sqrt();
        for (o, e) in out.intensities().iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
            assert!((o - e / sd).abs() < 1e-12);
        }
        assert!(matches!(snv(&sp(vec![1.0; 5])), Err(Error::ConstantSpectrum(_))));
    }

    #[test]
    fn snv_affine_invariance() {
        let y = vec![0.3, -1.2, 4.4, 2.0, 0.0, 9.1];
        let a = snv(&sp(y.clone())).unwrap();
        let b = snv(&sp(y.iter().map(|v| 3.5 * v - 20.0).collect())).unwrap();
        for (x, z) in a.intensities().iter().zip(b.intensities()) {
            assert!((x - z).abs() < 1e-9);
        }
    }
}
