//! Spectrum to spectrum preprocessing kernels and chain execution.

mod asls;
mod chain;
mod derivative;
mod detrend;
mod msc;
mod normalize;
mod savgol;
mod step;

pub use asls::{asls_baseline, asls_objective, AslsOutput};
pub use chain::{
    apply_chain, apply_step, batch_quality_report, quality_report, ChainInput, QualityReport, MARGIN_FRACTION,
};
pub use derivative::derivative;
pub use detrend::{detrend, scaled_basis};
pub use msc::{msc, msc_spectrum};
pub use normalize::{minmax_normalize, snv};
pub use savgol::{savgol_weights, savitzky_golay};
pub use step::{
    chain_abbrev, parse_chain, PreprocessStep, DEFAULT_ASLS_ITERS, DEFAULT_ASLS_LAMBDA, DEFAULT_ASLS_P,
    DEFAULT_SG_DEGREE, DEFAULT_SG_HALF_WINDOW,
};
