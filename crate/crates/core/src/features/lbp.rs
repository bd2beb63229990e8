//! Absorbance and Pearson correlation against reference absorbance curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Spectrum;
use crate::scalar::Real;

/// `A(λ) = log₁₀(I₀(λ) / I(λ))`.
pub fn absorbance<T: Real>(intensity: &Spectrum<T>, incident: &Spectrum<T>) -> Result<Spectrum<T>> {
    if intensity.wavelengths() != incident.wavelengths() {
        return Err(Error::LengthMismatch(
            "transmitted and incident spectra are on different grids".into(),
        ));
    }
    for (i, (&a, &b)) in intensity.intensities().iter().zip(incident.intensities()).enumerate() {
        if !(a > T::zero()) || !(b > T::zero()) {
            return Err(Error::NonPositiveIntensity(i));
        }
    }
    intensity.with_intensities(
        intensity
            .intensities()
            .iter()
            .zip(incident.intensities())
            .map(|(&i, &i0)| (i0 / i).log10())
            .collect(),
    )
}

/// Pearson correlation; `None` when either side is constant.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    let n = T::from_usize_lossy(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > T::zero()) || !(sbb > T::zero()) {
        return None;
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// One reference absorbance curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReferenceCurve<T: Real = f64> {
    pub id: String,
    pub values: Vec<T>,
}

/// The `n_top` largest correlations of `a` with `refs`, descending, with the
/// ids of the matching references. Ties keep reference order.
pub fn pearson_features<T: Real>(a: &[T], refs: &[ReferenceCurve<T>], n_top: usize) -> Result<(Vec<T>, Vec<String>)> {
    if n_top < 1 || refs.len() < n_top {
        return Err(Error::InvalidParameter(format!(
            "need at least n_top = {n_top} ≥ 1 references, got {}",
            refs.len()
        )));
    }
    let mut scored = Vec::with_capacity(refs.len());
    for (k, r) in refs.iter().enumerate() {
        if r.values.len() != a.len() {
            return Err(Error::DimMismatch {
                expected: a.len(),
                actual: r.values.len(),
            });
        }
        let Some(_) = pearson(&r.values, &r.values) else {
            return Err(Error::ConstantReference(r.id.clone()));
        };
        let v = pearson(a, &r.values).ok_or_else(|| Error::ConstantSpectrum("absorbance input".into()))?;
        scored.push((v, k));
    }
    scored.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.1.cmp(&y.1))
    });
    scored.truncate(n_top);
    Ok((
        scored.iter().map(|&(v, _)| v).collect(),
        scored.iter().map(|&(_, k)| refs[k].id.clone()).collect(),
    ))
}

/// Reference curves from labelled calibration spectra: samples are sorted by
/// response and cut into `n_bins` near-equal groups; each curve is the mean
/// spectrum of one group.
pub fn lbp_references<T: Real>(rows: &[Vec<T>], response: &[f64], n_bins: usize) -> Result<Vec<ReferenceCurve<T>>> {
    if n_bins < 1 || rows.len() < n_bins {
        return Err(Error::InvalidParameter(format!(
            "{} calibration samples cannot fill {n_bins} bins",
            rows.len()
        )));
    }
    if response.len() != rows.len() {
        return Err(Error::DimMismatch {
            expected: rows.len(),
            actual: response.len(),
        });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| {
        response[i]
            .partial_cmp(&response[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let dim = rows[0].len();
    let n = rows.len();
    let mut refs = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let lo = b * n / n_bins;
        let hi = (b + 1) * n / n_bins;
        let members = &order[lo..hi];
        let k = T::from_usize_lossy(members.len());
        let values: Vec<T> = (0..dim)
            .map(|j| members.iter().map(|&i| rows[i][j]).sum::<T>() / k)
            .collect();
        let (rlo, rhi) = (response[members[0]], response[members[members.len() - 1]]);
        refs.push(ReferenceCurve {
            id: format!("bin{}[{rlo}..{rhi}]", b + 1),
            values,
        });
    }
    Ok(refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(y: Vec<f64>) -> Spectrum {
        Spectrum::new("s", (0..y.len()).map(|i| 500.0 + i as f64).collect(), y).unwrap()
    }

    #[test]
    fn absorbance_decades() {
        let i0 = sp(vec![10.0, 20.0, 30.0, 40.0, 50.0]);
        assert!(absorbance(&i0, &i0).unwrap().intensities().iter().all(|&v| v == 0.0));
        let i = sp(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(absorbance(&i, &i0)
            .unwrap()
            .intensities()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-15));
        let z = sp(vec![1.0, 0.0, 3.0, 4.0, 5.0]);
        assert!(matches!(absorbance(&z, &i0), Err(Error::NonPositiveIntensity(1))));
    }

    #[test]
    fn self_and_anti_correlation() {
        let r = |id: &str, v: Vec<f64>| ReferenceCurve {
            id: id.into(),
            values: v,
        };
        let refs = vec![
            r("a", vec![1.0, 3.0, 2.0, 5.0]),
            r("b", vec![4.0, 1.0, 0.0, 2.0]),
            r("c", vec![0.0, 1.0, 2.0, 3.0]),
        ];
        let (v, ids) = pearson_features(&[1.0, 3.0, 2.0, 5.0], &refs, 3).unwrap();
        assert_eq!(ids[0], "a");
        assert!((v[0] - 1.0).abs() < 1e-15);
        let neg = pearson(&[-1.0, -3.0, -2.0, -5.0], &refs[0].values).unwrap();
        assert!((neg + 1.0).abs() < 1e-15);
        let flat = vec![r("f", vec![1.0; 4])];
        assert!(matches!(
            pearson_features(&[1.0, 2.0, 3.0, 4.0], &flat, 1),
            Err(Error::ConstantReference(_))
        ));
    }

    #[test]
    fn tertile_references() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, 1.0, -(i as f64)]).collect();
        let y: Vec<f64> = (0..9).rev().map(|i| i as f64).collect();
        let refs = lbp_references(&rows, &y, 3).unwrap();
        assert_eq!(refs.len(), 3);
        assert_eq!(refs[0].values, vec![7.0, 1.0, -7.0]);
    }
}
