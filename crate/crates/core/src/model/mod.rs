//! Domain types, dataset files, splitting and anomaly-set construction.

mod anomaly;
mod dataset;
mod io;
mod spectrum;
mod split;

pub use anomaly::{build_anomaly_dataset, AnomalyDataset, DEFAULT_NOISE_SCALE};
pub use dataset::{FeatureMatrix, Label, LabelRecord, SpectralDataset, TaskType};
pub use io::{
    load_csv, load_dataset, load_json, parse_spectra_csv, save_csv, save_dataset, save_json, sidecar_path, spectra_csv,
    DatasetDocument, DatasetFormat, SampleDocument, SidecarMeta, META_KEY,
};
pub use spectrum::{Spectrum, MIN_SPECTRUM_LEN, UNIFORM_GRID_RTOL};
pub use split::{split_dataset, split_indices, Split, SplitRatio, MIN_SPLIT_SAMPLES};
