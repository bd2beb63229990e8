//! Feature extraction: projections (PCA, PLS, NMF), wavelet and peak
//! descriptors, correlation against reference curves, summary statistics.

mod cwt;
mod lbp;
mod nmf;
mod pca;
mod peaks;
mod pls;
mod spec;
mod stats;

pub use cwt::{cwt, cwt_feature_names, cwt_features, ricker, Wavelet, MIN_CWT_LEN};
pub use lbp::{absorbance, lbp_references, pearson, pearson_features, ReferenceCurve};
pub use nmf::{nmf_fit, nmf_transform, NmfModel};
pub use pca::{pca_fit, pca_inverse, pca_transform, PcaModel};
pub use peaks::{detect_peaks, peak_feature_names, peak_features, Peak};
pub use pls::{pls_fit, PlsModel};
pub use spec::{
    extract_features, numeric_response, FeatureSpec, FittedExtractor, FittedModel, DEFAULT_LBP_BINS, DEFAULT_LBP_TOP,
    DEFAULT_PCA_COMPONENTS, FITTED_SCHEMA_VERSION,
};
pub use stats::{summarize_stats, STATS_FEATURE_NAMES, STATS_PEAK_PROMINENCE};
