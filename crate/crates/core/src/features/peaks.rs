//! Local-maximum peak picking filtered by topographic prominence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Spectrum;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    /// Location in nm.
    pub location: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Prominence of the strict local maximum at `i`: its height above the
/// higher of the two lowest points reached before meeting higher ground (or
/// the spectrum end) on either side.
fn prominence<T: Real>(y: &[T], i: usize) -> T {
    let h = y[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if y[j] > h {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

pub fn detect_peaks<T: Real>(s: &Spectrum<T>, min_prominence: f64, max_peaks: usize) -> Result<Vec<Peak>> {
    if !(min_prominence > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "peak prominence must be > 0, got {min_prominence}"
        )));
    }
    let y = s.intensities();
    let grid = s.wavelengths();
    let mut peaks: Vec<Peak> = (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] > y[i + 1])
        .map(|i| Peak {
            index: i,
            location: grid[i].as_f64(),
            height: y[i].as_f64(),
            prominence: prominence(y, i).as_f64(),
        })
        .filter(|p| p.prominence >= min_prominence)
        .collect();
    peaks.sort_by(|a, b| {
        b.prominence
            .partial_cmp(&a.prominence)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });
    peaks.truncate(max_peaks);
    Ok(peaks)
}

/// Fixed-width feature vector `[location, height]` per slot, most prominent
/// first, zero-padded to `max_peaks` slots.
pub fn peak_features<T: Real>(s: &Spectrum<T>, min_prominence: f64, max_peaks: usize) -> Result<Vec<T>> {
    let peaks = detect_peaks(s, min_prominence, max_peaks)?;
    let mut out = vec![T::zero(); 2 * max_peaks];
    for (k, p) in peaks.iter().enumerate() {
        out[2 * k] = T::lit(p.location);
        out[2 * k + 1] = T::lit(p.height);
    }
    Ok(out)
}

pub fn peak_feature_names(max_peaks: usize) -> Vec<String> {
    (1..=max_peaks)
        .flat_map(|k| [format!("peak{k}_location"), format!("peak{k}_height")])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(f: impl Fn(f64) -> f64) -> Spectrum {
        let g: Vec<f64> = (0..200).map(|i| 800.0 + i as f64).collect();
        let y = g.iter().map(|&x| f(x)).collect();
        Spectrum::new("p", g, y).unwrap()
    }

    fn gauss(x: f64, c: f64, h: f64) -> f64 {
        h * (-(x - c).powi(2) / 50.0).exp()
    }

    #[test]
    fn single_peak_at_apex() {
        let p = detect_peaks(&sp(|x| gauss(x, 900.0, 1.0)), 0.1, 10).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].location, 900.0);
        assert!(detect_peaks(&sp(|x| x), 1e-6, 10).unwrap().is_empty());
    }

    #[test]
    fn prominence_threshold_separates_peaks() {
        let s = sp(|x| gauss(x, 860.0, 1.0) + gauss(x, 940.0, 0.5));
        assert_eq!(detect_peaks(&s, 0.1, 10).unwrap().len(), 2);
        let p = detect_peaks(&s, 0.75, 10).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].location, 860.0);
    }
}
