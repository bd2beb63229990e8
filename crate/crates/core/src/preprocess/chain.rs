//! Ordered application of preprocessing steps and output quality checks.

use serde::{Deserialize, Serialize};

use super::{
    asls_baseline, derivative, detrend, minmax_normalize, msc, msc_spectrum, savitzky_golay, snv, PreprocessStep,
};
use crate::error::{Error, Result};
use crate::model::{SpectralDataset, Spectrum};
use crate::scalar::{sample_std, Real};

/// Fraction of the grid at each end treated as signal-free margin.
pub const MARGIN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub finite: bool,
    /// Mean |value| over the first and last 5% of the grid.
    pub baseline_flatness: f64,
    /// Sample standard deviation of the second difference.
    pub noise_estimate: f64,
    pub warnings: Vec<String>,
}

fn margin_indices(n: usize) -> Vec<usize> {
    let k = ((n as f64 * MARGIN_FRACTION).ceil() as usize).max(1);
    let mut idx: Vec<usize> = (0..k.min(n)).collect();
    idx.extend(n.saturating_sub(k).max(k)..n);
    idx
}

pub fn quality_report<T: Real>(s: &Spectrum<T>) -> QualityReport {
    let y: Vec<f64> = s.intensities().iter().map(|v| v.as_f64()).collect();
    let finite = y.iter().all(|v| v.is_finite());
    let margins = margin_indices(y.len());
    let baseline_flatness = margins.iter().map(|&i| y[i].abs()).sum::<f64>() / margins.len() as f64;
    let d2: Vec<f64> = y.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let noise_estimate = sample_std(&d2);
    let mut warnings = Vec::new();
    if !finite {
        warnings.push(format!("`{}` contains non-finite values", s.id()));
    }
    if y.iter().all(|&v| v == y[0]) {
        warnings.push(format!("`{}` is constant after preprocessing", s.id()));
    }
    QualityReport {
        finite,
        baseline_flatness,
        noise_estimate,
        warnings,
    }
}

/// Averages per-spectrum reports; warnings are concatenated in order.
pub fn batch_quality_report<T: Real>(spectra: &[Spectrum<T>]) -> QualityReport {
    if spectra.is_empty() {
        return QualityReport {
            finite: true,
            baseline_flatness: 0.0,
            noise_estimate: 0.0,
            warnings: vec!["empty dataset".into()],
        };
    }
    let reports: Vec<QualityReport> = spectra.iter().map(quality_report).collect();
    let n = reports.len() as f64;
    QualityReport {
        finite: reports.iter().all(|r| r.finite),
        baseline_flatness: reports.iter().map(|r| r.baseline_flatness).sum::<f64>() / n,
        noise_estimate: reports.iter().map(|r| r.noise_estimate).sum::<f64>() / n,
        warnings: reports.into_iter().flat_map(|r| r.warnings).collect(),
    }
}

/// Applies one step to one spectrum. Batch-only steps are rejected.
pub fn apply_step<T: Real>(s: &Spectrum<T>, step: &PreprocessStep) -> Result<Spectrum<T>> {
    step.validate()?;
    match step {
        PreprocessStep::AsLS { lambda, p, iters } => Ok(asls_baseline(s, *lambda, *p, *iters)?.corrected),
        PreprocessStep::SavitzkyGolay { m, degree, deriv_order } => savitzky_golay(s, *m, *degree, *deriv_order),
        PreprocessStep::MinMax => minmax_normalize(s),
        PreprocessStep::SNV => snv(s),
        PreprocessStep::MSC { reference: Some(r) } => {
            let r: Vec<T> = r.iter().map(|&v| T::lit(v)).collect();
            msc_spectrum(s, &r)
        }
        PreprocessStep::MSC { reference: None } => Err(Error::BatchOnlyStep {
            index: 0,
            kind: step.kind_name().into(),
        }),
        PreprocessStep::Detrend { order } => detrend(s, *order),
        PreprocessStep::FirstDerivative => derivative(s, 1),
        PreprocessStep::SecondDerivative => derivative(s, 2),
    }
}

/// Something a chain can run over: a single spectrum or a whole dataset.
pub trait ChainInput: Sized {
    fn apply_indexed(&self, index: usize, step: &PreprocessStep) -> Result<Self>;
    fn quality(&self) -> QualityReport;
}

fn wrap(index: usize, step: &PreprocessStep, e: Error) -> Error {
    match e {
        Error::BatchOnlyStep { kind, .. } => Error::BatchOnlyStep { index, kind },
        e => Error::StepFailed {
            index,
            kind: step.kind_name().into(),
            source: Box::new(e),
        },
    }
}

impl<T: Real> ChainInput for Spectrum<T> {
    fn apply_indexed(&self, index: usize, step: &PreprocessStep) -> Result<Self> {
        apply_step(self, step).map_err(|e| wrap(index, step, e))
    }

    fn quality(&self) -> QualityReport {
        quality_report(self)
    }
}

impl<T: Real> ChainInput for SpectralDataset<T> {
    fn apply_indexed(&self, index: usize, step: &PreprocessStep) -> Result<Self> {
        if self.is_empty() {
            return Ok(self.clone());
        }
        let out = match step {
            PreprocessStep::MSC { reference: None } => msc(self, None),
            _ => self
                .spectra()
                .iter()
                .map(|s| apply_step(s, step))
                .collect::<Result<Vec<_>>>()
                .and_then(|v| self.with_spectra(v)),
        };
        out.map_err(|e| wrap(index, step, e))
    }

    fn quality(&self) -> QualityReport {
        batch_quality_report(self.spectra())
    }
}

/// Runs `steps` left to right and reports on the final output.
pub fn apply_chain<I: ChainInput + Clone>(input: &I, steps: &[PreprocessStep]) -> Result<(I, QualityReport)> {
    let mut cur = input.clone();
    for (i, step) in steps.iter().enumerate() {
        cur = cur.apply_indexed(i, step)?;
    }
    let q = cur.quality();
    Ok((cur, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::parse_chain;

    fn sp(f: impl Fn(f64) -> f64) -> Spectrum {
        let g: Vec<f64> = (0..60).map(|i| 1000.0 + 2.0 * i as f64).collect();
        let y = g.iter().map(|&x| f(x)).collect();
        Spectrum::new("q", g, y).unwrap()
    }

    #[test]
    fn empty_chain_is_identity() {
        let s = sp(|x| (x / 9.0).cos());
        let (out, q) = apply_chain(&s, &[]).unwrap();
        assert_eq!(out, s);
        assert!(q.finite);
    }

    #[test]
    fn msc_on_single_spectrum_names_index() {
        let s = sp(|x| x.sin());
        let steps = parse_chain("SG+MSC").unwrap();
        match apply_chain(&s, &steps) {
            Err(Error::BatchOnlyStep { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn failing_step_reports_index() {
        let s = sp(|_| 1.0);
        match apply_chain(&s, &parse_chain("SG+SNV").unwrap()) {
            Err(Error::StepFailed { index, kind, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(kind, "SNV");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quality_of_flat_zero_margins() {
        let s = sp(|x| (-(x - 1060.0).powi(2) / 50.0).exp());
        let q = quality_report(&s);
        assert!(q.baseline_flatness < 1e-6);
        assert!(q.warnings.is_empty());
    }
}
