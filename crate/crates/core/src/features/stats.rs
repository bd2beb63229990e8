//! Summary statistics of one spectrum.

use crate::model::Spectrum;
use crate::scalar::{mean, sample_std, Real};

use super::peaks::detect_peaks;

/// Peak-count prominence as a fraction of the intensity range.
pub const STATS_PEAK_PROMINENCE: f64 = 0.05;

pub const STATS_FEATURE_NAMES: [&str; 8] = [
    "mean",
    "std",
    "min",
    "max",
    "skewness",
    "excess_kurtosis",
    "area",
    "peak_count",
];

/// `[mean, sample std, min, max, skewness, excess kurtosis, trapezoid area,
/// peak count]`. Skewness and kurtosis use population moments and are 0 for
/// a constant spectrum.
pub fn summarize_stats<T: Real>(s: &Spectrum<T>) -> Vec<T> {
    let y = s.intensities();
    let g = s.wavelengths();
    let m = mean(y);
    let sd = sample_std(y);
    let lo = y.iter().copied().fold(T::infinity(), T::min);
    let hi = y.iter().copied().fold(T::neg_infinity(), T::max);
    let n = T::from_usize_lossy(y.len());
    let m2 = y.iter().map(|&v| (v - m).powi(2)).sum::<T>() / n;
    let m3 = y.iter().map(|&v| (v - m).powi(3)).sum::<T>() / n;
    let m4 = y.iter().map(|&v| (v - m).powi(4)).sum::<T>() / n;
    let (skew, kurt) = if m2 > T::zero() {
        (m3 / m2.powf(T::lit(1.5)), m4 / (m2 * m2) - T::lit(3.0))
    } else {
        (T::zero(), T::zero())
    };
    let area = g
        .windows(2)
        .zip(y.windows(2))
        .map(|(w, v)| (w[1] - w[0]) * (v[0] + v[1]) / T::lit(2.0))
        .sum::<T>();
    let range = (hi - lo).as_f64();
    let peaks = if range > 0.0 {
        detect_peaks(s, STATS_PEAK_PROMINENCE * range, usize::MAX).map_or(0, |p| p.len())
    } else {
        0
    };
    vec![m, sd, lo, hi, skew, kurt, area, T::from_usize_lossy(peaks)]
}
