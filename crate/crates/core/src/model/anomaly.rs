//! Construction of one-class anomaly datasets from a labelled batch.
//!
//! Output composition is 60% reference-class samples (flag `true`), 20%
//! samples of other classes and 20% perturbed copies of reference samples
//! (both flagged `false`).

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::{Label, SpectralDataset, TaskType};
use super::spectrum::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::{sample_std, Real};

pub const DEFAULT_NOISE_SCALE: f64 = 0.05;

/// Result of [`build_anomaly_dataset`] together with non-fatal warnings.
#[derive(Debug, Clone)]
pub struct AnomalyDataset<T: Real = f64> {
    pub dataset: SpectralDataset<T>,
    pub warnings: Vec<String>,
}

/// Builds a 60/20/20 anomaly dataset around `reference_class`.
///
/// With `k = min(⌊R/3⌋, others)` (R reference samples, `others` samples of
/// the remaining classes) the output holds `3k` reference samples, `k`
/// inter-class anomalies and `k` perturbed reference copies. Perturbation
/// is zero-mean Gaussian noise whose per-wavelength σ is `noise_scale`
/// times the reference-class sample standard deviation at that wavelength.
pub fn build_anomaly_dataset<T: Real>(
    ds: &SpectralDataset<T>,
    reference_class: &str,
    seed: u64,
    noise_scale: f64,
) -> Result<AnomalyDataset<T>> {
    if ds.task() != TaskType::Classification {
        return Err(Error::InvalidParameter(format!(
            "anomaly construction needs a classification dataset, got {}",
            ds.task()
        )));
    }
    if !(noise_scale >= 0.0) || !noise_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise_scale {noise_scale} must be ≥ 0"
        )));
    }
    let mut reference: Vec<usize> = Vec::new();
    let mut others: Vec<(String, usize)> = Vec::new();
    for (i, l) in ds.labels().iter().enumerate() {
        match l.as_class() {
            Some(c) if c == reference_class => reference.push(i),
            Some(c) => others.push((c.to_string(), i)),
            None => unreachable!("classification dataset holds class labels"),
        }
    }
    let k = (reference.len() / 3).min(others.len());
    if k == 0 {
        return Err(Error::InsufficientReferenceSamples(format!(
            "class `{reference_class}` has {} sample(s) and {} other-class sample(s); need ≥ 3 and ≥ 1",
            reference.len(),
            others.len()
        )));
    }

    let mut warnings = Vec::new();
    if noise_scale == 0.0 {
        let w = "noise_scale = 0: intra-class anomalies are exact copies of their sources".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectra = ds.spectra();

    // per-wavelength σ of the full reference class
    let dim = ds.wavelengths().len();
    let sigma: Vec<f64> = (0..dim)
        .map(|j| {
            let col: Vec<f64> = reference
                .iter()
                .map(|&i| spectra[i].intensities()[j].as_f64())
                .collect();
            noise_scale * sample_std(&col)
        })
        .collect();

    let mut ref_pool = reference.clone();
    ref_pool.shuffle(&mut rng);
    let normals: Vec<usize> = ref_pool[..3 * k].to_vec();

    // inter-class: round-robin over the other classes, each shuffled
    let mut by_class: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
    for (c, i) in others {
        by_class.entry(c).or_default().push(i);
    }
    let mut queues: Vec<Vec<usize>> = by_class.into_values().collect();
    for q in &mut queues {
        q.shuffle(&mut rng);
        q.reverse();
    }
    let mut inter = Vec::with_capacity(k);
    while inter.len() < k {
        for q in &mut queues {
            if inter.len() == k {
                break;
            }
            if let Some(i) = q.pop() {
                inter.push(i);
            }
        }
    }

    let mut intra_src = reference.clone();
    intra_src.shuffle(&mut rng);
    let intra_src: Vec<usize> = intra_src.into_iter().cycle().take(k).collect();

    let grid: Arc<[T]> = Arc::clone(ds.grid());
    let mut out_spectra = Vec::with_capacity(5 * k);
    let mut out_labels = Vec::with_capacity(5 * k);
    for &i in &normals {
        out_spectra.push(spectra[i].clone());
        out_labels.push(Label::Flag(true));
    }
    for &i in &inter {
        out_spectra.push(spectra[i].clone());
        out_labels.push(Label::Flag(false));
    }
    for (n, &i) in intra_src.iter().enumerate() {
        let src = &spectra[i];
        let values: Vec<T> = src
            .intensities()
            .iter()
            .zip(&sigma)
            .map(|(&y, &s)| {
                if s > 0.0 {
                    let noise = Normal::new(0.0, s).expect("finite sigma").sample(&mut rng);
                    y + T::lit(noise)
                } else {
                    y
                }
            })
            .collect();
        let id = format!("{}~perturbed{n}", src.id());
        out_spectra.push(Spectrum::on_grid(id, Arc::clone(&grid), values)?);
        out_labels.push(Label::Flag(false));
    }
    let dataset = SpectralDataset::on_grid(ds.material(), TaskType::AnomalyDetection, grid, out_spectra, out_labels)?;
    Ok(AnomalyDataset { dataset, warnings })
}
