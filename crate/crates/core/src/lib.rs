//! Spectral data model, preprocessing kernels, feature extraction, metrics
//! and classical baselines.
//!
//! Kernels are generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the common `f64` case.

// NaN must fail positivity checks, so `!(x > 0)` is intended. Generic
// scalars only require the plain arithmetic traits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]

pub mod baselines;
pub mod error;
pub mod features;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod plan;
pub mod preprocess;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use plan::MethodPlan;
pub use scalar::Real;

pub type Spectrum64 = model::Spectrum<f64>;
pub type Spectrum32 = model::Spectrum<f32>;
pub type Dataset64 = model::SpectralDataset<f64>;
pub type Dataset32 = model::SpectralDataset<f32>;
pub type Features64 = model::FeatureMatrix<f64>;
