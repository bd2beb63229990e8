//! Multiplicative scatter correction.

use crate::error::{Error, Result};
use crate::model::{SpectralDataset, Spectrum};
use crate::scalar::{mean, Real};

const MIN_SLOPE: f64 = 1e-12;

/// Regresses `s` on `reference` (`y ≈ a + b·ref`) and returns `(y − a) / b`.
pub fn msc_spectrum<T: Real>(s: &Spectrum<T>, reference: &[T]) -> Result<Spectrum<T>> {
    if reference.len() != s.len() {
        return Err(Error::DimMismatch {
            expected: s.len(),
            actual: reference.len(),
        });
    }
    let y = s.intensities();
    let mr = mean(reference);
    let my = mean(y);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&r, &v) in reference.iter().zip(y) {
        sxy += (r - mr) * (v - my);
        sxx += (r - mr) * (r - mr);
    }
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateRegression(format!(
            "{} (reference is constant)",
            s.id()
        )));
    }
    let b = sxy / sxx;
    if !(b.abs() >= T::lit(MIN_SLOPE)) {
        return Err(Error::DegenerateRegression(s.id().to_string()));
    }
    let a = my - b * mr;
    s.with_intensities(y.iter().map(|&v| (v - a) / b).collect())
}

/// MSC over a batch. With no explicit reference the batch mean spectrum is
/// used, which needs at least two spectra.
pub fn msc<T: Real>(batch: &SpectralDataset<T>, reference: Option<&[T]>) -> Result<SpectralDataset<T>> {
    let owned;
    let reference = match reference {
        Some(r) => r,
        None => {
            if batch.len() < 2 {
                return Err(Error::TooFewSamples(format!(
                    "MSC against the batch mean needs ≥ 2 spectra, got {}",
                    batch.len()
                )));
            }
            let n = batch.wavelengths().len();
            let k = T::from_usize_lossy(batch.len());
            owned = (0..n)
                .map(|j| batch.spectra().iter().map(|s| s.intensities()[j]).sum::<T>() / k)
                .collect::<Vec<T>>();
            &owned[..]
        }
    };
    let out = batch
        .spectra()
        .iter()
        .map(|s| msc_spectrum(s, reference))
        .collect::<Result<Vec<_>>>()?;
    batch.with_spectra(out)
}
