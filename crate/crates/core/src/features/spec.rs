//! Extractor selection, fitting and application.

use serde::{Deserialize, Serialize};

use super::cwt::{cwt_feature_names, cwt_features, Wavelet};
use super::lbp::{lbp_references, pearson_features, ReferenceCurve};
use super::nmf::{nmf_fit, nmf_transform, NmfModel};
use super::pca::{pca_fit, pca_transform, PcaModel};
use super::peaks::{peak_feature_names, peak_features};
use super::pls::{pls_fit, PlsModel};
use super::stats::{summarize_stats, STATS_FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::model::{FeatureMatrix, Label, SpectralDataset, Spectrum, TaskType};
use crate::scalar::Real;

pub const FITTED_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PCA_COMPONENTS: usize = 5;
pub const DEFAULT_LBP_TOP: usize = 3;
pub const DEFAULT_LBP_BINS: usize = 3;

fn five() -> usize {
    DEFAULT_PCA_COMPONENTS
}
fn three() -> usize {
    3
}
fn nmf_iters() -> usize {
    200
}
fn default_scales() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}
fn default_prominence() -> f64 {
    0.05
}

/// Which extractor to run and with what parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum FeatureSpec {
    PCA {
        #[serde(default = "five")]
        n_components: usize,
    },
    PLS {
        #[serde(default = "five")]
        n_latent: usize,
    },
    CWT {
        #[serde(default = "default_scales")]
        scales: Vec<f64>,
        #[serde(default)]
        wavelet: Wavelet,
    },
    LambertBeerPearson {
        #[serde(default = "three")]
        n_top: usize,
        #[serde(default = "three")]
        n_bins: usize,
    },
    NMF {
        #[serde(default = "three")]
        rank: usize,
        #[serde(default = "nmf_iters")]
        iters: usize,
        #[serde(default)]
        seed: u64,
    },
    Peaks {
        #[serde(default = "default_prominence")]
        prominence: f64,
        #[serde(default = "five")]
        max_peaks: usize,
    },
    Stats,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::PCA {
            n_components: DEFAULT_PCA_COMPONENTS,
        }
    }
}

impl FeatureSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FeatureSpec::PCA { .. } => "PCA",
            FeatureSpec::PLS { .. } => "PLS",
            FeatureSpec::CWT { .. } => "CWT",
            FeatureSpec::LambertBeerPearson { .. } => "LambertBeerPearson",
            FeatureSpec::NMF { .. } => "NMF",
            FeatureSpec::Peaks { .. } => "Peaks",
            FeatureSpec::Stats => "Stats",
        }
    }

    /// Whether fitting needs response values (fit on training samples only).
    pub fn is_supervised(&self) -> bool {
        matches!(self, FeatureSpec::PLS { .. } | FeatureSpec::LambertBeerPearson { .. })
    }

    /// Parameter-only checks; sample-count bounds are checked when fitting.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self {
            FeatureSpec::PCA { n_components: 0 } => bad("PCA n_components must be ≥ 1"),
            FeatureSpec::PLS { n_latent: 0 } => bad("PLS n_latent must be ≥ 1"),
            FeatureSpec::CWT { scales, .. } if scales.is_empty() || scales.iter().any(|&a| !(a > 0.0)) => {
                bad("CWT scales must be positive and non-empty")
            }
            FeatureSpec::LambertBeerPearson { n_top, n_bins } if *n_top == 0 || n_bins < n_top => {
                bad("LambertBeerPearson needs 1 ≤ n_top ≤ n_bins")
            }
            FeatureSpec::NMF { rank, iters, .. } if *rank == 0 || *iters == 0 => bad("NMF rank and iters must be ≥ 1"),
            FeatureSpec::Peaks { prominence, max_peaks } if !(*prominence > 0.0) || *max_peaks == 0 => {
                bad("Peaks needs prominence > 0 and max_peaks ≥ 1")
            }
            _ => Ok(()),
        }
    }

    /// Parses short names such as `PCA`, `PLS`, `Pearson correlation features`.
    pub fn from_name(text: &str) -> Option<Self> {
        let t: String = text
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        Some(match t.as_str() {
            "PCA" => FeatureSpec::default(),
            "PLS" | "PLSR" => FeatureSpec::PLS { n_latent: 5 },
            "CWT" | "WAVELET" => FeatureSpec::CWT {
                scales: default_scales(),
                wavelet: Wavelet::Ricker,
            },
            "LBP" | "LAMBERTBEERPEARSON" | "PEARSON" | "PEARSONCORRELATION" | "PEARSONCORRELATIONFEATURES" => {
                FeatureSpec::LambertBeerPearson {
                    n_top: DEFAULT_LBP_TOP,
                    n_bins: DEFAULT_LBP_BINS,
                }
            }
            "NMF" => FeatureSpec::NMF {
                rank: 3,
                iters: 200,
                seed: 0,
            },
            "PEAKS" | "PEAK" | "PEAKDETECTION" => FeatureSpec::Peaks {
                prominence: default_prominence(),
                max_peaks: 5,
            },
            "STATS" | "STATISTICS" => FeatureSpec::Stats,
            _ => return None,
        })
    }

    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            FeatureSpec::PCA { n_components } => vec![("n_components", n_components.to_string())],
            FeatureSpec::PLS { n_latent } => vec![("n_latent", n_latent.to_string())],
            FeatureSpec::CWT { scales, .. } => vec![(
                "scales",
                scales.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            )],
            FeatureSpec::LambertBeerPearson { n_top, n_bins } => {
                vec![("n_top", n_top.to_string()), ("n_bins", n_bins.to_string())]
            }
            FeatureSpec::NMF { rank, iters, seed } => vec![
                ("rank", rank.to_string()),
                ("iters", iters.to_string()),
                ("seed", seed.to_string()),
            ],
            FeatureSpec::Peaks { prominence, max_peaks } => {
                vec![
                    ("prominence", prominence.to_string()),
                    ("max_peaks", max_peaks.to_string()),
                ]
            }
            FeatureSpec::Stats => Vec::new(),
        }
    }

    /// Sets one named parameter from text, validating the result.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<()> {
        fn num<V: std::str::FromStr>(name: &str, v: &str) -> Result<V> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`{v}` is not a valid value for {name}")))
        }
        let mut next = self.clone();
        match (&mut next, name) {
            (FeatureSpec::PCA { n_components }, "n_components") => *n_components = num(name, value)?,
            (FeatureSpec::PLS { n_latent }, "n_latent") => *n_latent = num(name, value)?,
            (FeatureSpec::CWT { scales, .. }, "scales") => {
                *scales = value.split(',').map(|v| num(name, v)).collect::<Result<_>>()?
            }
            (FeatureSpec::LambertBeerPearson { n_top, .. }, "n_top") => *n_top = num(name, value)?,
            (FeatureSpec::LambertBeerPearson { n_bins, .. }, "n_bins") => *n_bins = num(name, value)?,
            (FeatureSpec::NMF { rank, .. }, "rank") => *rank = num(name, value)?,
            (FeatureSpec::NMF { iters, .. }, "iters") => *iters = num(name, value)?,
            (FeatureSpec::NMF { seed, .. }, "seed") => *seed = num(name, value)?,
            (FeatureSpec::Peaks { prominence, .. }, "prominence") => *prominence = num(name, value)?,
            (FeatureSpec::Peaks { max_peaks, .. }, "max_peaks") => *max_peaks = num(name, value)?,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{} has no parameter `{name}`",
                    self.kind_name()
                )))
            }
        }
        next.validate()?;
        *self = next;
        Ok(())
    }
}

impl std::fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = self.params();
        if p.is_empty() {
            f.write_str(self.kind_name())
        } else {
            let p: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "{}({})", self.kind_name(), p.join(", "))
        }
    }
}

/// Learned state of an extractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Real")]
pub enum FittedModel<T: Real = f64> {
    PCA(PcaModel<T>),
    PLS(PlsModel<T>),
    CWT {
        scales: Vec<f64>,
        wavelet: Wavelet,
    },
    LambertBeerPearson {
        n_top: usize,
        references: Vec<ReferenceCurve<T>>,
    },
    NMF(NmfModel<T>),
    Peaks {
        prominence: f64,
        max_peaks: usize,
    },
    Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FittedExtractor<T: Real = f64> {
    pub schema_version: u32,
    pub model: FittedModel<T>,
}

fn rows_of<T: Real>(spectra: &[Spectrum<T>]) -> Vec<Vec<T>> {
    spectra.iter().map(|s| s.intensities().to_vec()).collect()
}

impl<T: Real> FittedExtractor<T> {
    /// Fits on `spectra`; supervised kinds need `response` (one value per spectrum).
    pub fn fit(spec: &FeatureSpec, spectra: &[Spectrum<T>], response: Option<&[f64]>) -> Result<Self> {
        spec.validate()?;
        let need_response = || {
            response
                .ok_or_else(|| Error::InvalidParameter(format!("{} needs response values to fit", spec.kind_name())))
        };
        let model = match spec {
            FeatureSpec::PCA { n_components } => FittedModel::PCA(pca_fit(&rows_of(spectra), *n_components)?),
            FeatureSpec::PLS { n_latent } => {
                let y: Vec<T> = need_response()?.iter().map(|&v| T::lit(v)).collect();
                FittedModel::PLS(pls_fit(&rows_of(spectra), &y, *n_latent)?)
            }
            FeatureSpec::CWT { scales, wavelet } => FittedModel::CWT {
                scales: scales.clone(),
                wavelet: *wavelet,
            },
            FeatureSpec::LambertBeerPearson { n_top, n_bins } => FittedModel::LambertBeerPearson {
                n_top: *n_top,
                references: lbp_references(&rows_of(spectra), need_response()?, *n_bins)?,
            },
            FeatureSpec::NMF { rank, iters, seed } => {
                FittedModel::NMF(nmf_fit(&rows_of(spectra), *rank, *iters, *seed)?.0)
            }
            FeatureSpec::Peaks { prominence, max_peaks } => FittedModel::Peaks {
                prominence: *prominence,
                max_peaks: *max_peaks,
            },
            FeatureSpec::Stats => FittedModel::Stats,
        };
        Ok(Self {
            schema_version: FITTED_SCHEMA_VERSION,
            model,
        })
    }

    pub fn transform(&self, spectra: &[Spectrum<T>]) -> Result<Vec<Vec<T>>> {
        match &self.model {
            FittedModel::PCA(m) => pca_transform(m, &rows_of(spectra)),
            FittedModel::PLS(m) => spectra.iter().map(|s| m.transform(s.intensities())).collect(),
            FittedModel::CWT { scales, wavelet } => spectra.iter().map(|s| cwt_features(s, scales, *wavelet)).collect(),
            FittedModel::LambertBeerPearson { n_top, references } => spectra
                .iter()
                .map(|s| pearson_features(s.intensities(), references, *n_top).map(|(v, _)| v))
                .collect(),
            FittedModel::NMF(m) => nmf_transform(m, &rows_of(spectra)),
            FittedModel::Peaks { prominence, max_peaks } => spectra
                .iter()
                .map(|s| peak_features(s, *prominence, *max_peaks))
                .collect(),
            FittedModel::Stats => Ok(spectra.iter().map(summarize_stats).collect()),
        }
    }

    pub fn feature_names(&self) -> Vec<String> {
        let numbered = |p: &str, k: usize| (1..=k).map(|i| format!("{p}{i}")).collect();
        match &self.model {
            FittedModel::PCA(m) => numbered("pc", m.n_components()),
            FittedModel::PLS(m) => numbered("lv", m.n_latent()),
            FittedModel::CWT { scales, .. } => cwt_feature_names(scales),
            FittedModel::LambertBeerPearson { n_top, .. } => numbered("r", *n_top),
            FittedModel::NMF(m) => numbered("nmf", m.basis.rows()),
            FittedModel::Peaks { max_peaks, .. } => peak_feature_names(*max_peaks),
            FittedModel::Stats => STATS_FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.schema_version != FITTED_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported extractor schema version {}",
                f.schema_version
            )));
        }
        Ok(f)
    }
}

/// Numeric response used by supervised extractors: regression values, or
/// 1/0 for anomaly flags. Classification labels have none.
pub fn numeric_response(labels: &[Label]) -> Option<Vec<f64>> {
    labels
        .iter()
        .map(|l| match l {
            Label::Value { value, .. } => Some(*value),
            Label::Flag(f) => Some(if *f { 1.0 } else { 0.0 }),
            Label::Class(_) => None,
        })
        .collect()
}

/// Fits on the dataset and transforms every sample.
///
/// Unsupervised extractors are fit on all spectra (labels are not used);
/// supervised ones only on `fit_indices`, normally the training split.
pub fn extract_features<T: Real>(
    spec: &FeatureSpec,
    ds: &SpectralDataset<T>,
    fit_indices: &[usize],
) -> Result<(FeatureMatrix<T>, FittedExtractor<T>)> {
    let fitted = if spec.is_supervised() {
        let sub = ds.subset(fit_indices)?;
        let y = numeric_response(sub.labels()).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{} needs numeric responses; {} labels have none",
                spec.kind_name(),
                TaskType::Classification
            ))
        })?;
        FittedExtractor::fit(spec, sub.spectra(), Some(&y))?
    } else {
        FittedExtractor::fit(spec, ds.spectra(), None)?
    };
    let rows = fitted.transform(ds.spectra())?;
    let fm = FeatureMatrix::new(ds.ids(), fitted.feature_names(), rows)?;
    Ok((fm, fitted))
}
