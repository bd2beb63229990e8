use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{all_finite, Real};

/// Minimum number of grid points a spectrum must carry.
pub const MIN_SPECTRUM_LEN: usize = 5;

/// Relative tolerance on the deviation of any grid step from the mean step
/// below which a grid counts as uniform.
pub const UNIFORM_GRID_RTOL: f64 = 1e-6;

/// A single spectrum on a strictly increasing wavelength grid (nm).
///
/// The grid is reference counted so that every spectrum of a dataset can
/// share one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real = f64> {
    id: String,
    wavelengths: Arc<[T]>,
    intensities: Vec<T>,
    uniform: bool,
}

impl<T: Real> Spectrum<T> {
    pub fn new(id: impl Into<String>, wavelengths: Vec<T>, intensities: Vec<T>) -> Result<Self> {
        Self::on_grid(id, Arc::from(wavelengths), intensities)
    }

    /// Builds a spectrum on an existing shared grid.
    pub fn on_grid(id: impl Into<String>, wavelengths: Arc<[T]>, intensities: Vec<T>) -> Result<Self> {
        let id = id.into();
        validate_grid(&id, &wavelengths)?;
        if intensities.len() != wavelengths.len() {
            return Err(Error::LengthMismatch(format!(
                "spectrum `{id}`: {} intensities on a {}-point grid",
                intensities.len(),
                wavelengths.len()
            )));
        }
        if !all_finite(&intensities) {
            return Err(Error::InvalidSpectrum {
                id,
                reason: "non-finite intensity".into(),
            });
        }
        let uniform = grid_is_uniform(&wavelengths);
        Ok(Self {
            id,
            wavelengths,
            intensities,
            uniform,
        })
    }

    /// Same grid and id, new values. Fails on non-finite output so no
    /// transform can leak NaN silently.
    pub fn with_intensities(&self, intensities: Vec<T>) -> Result<Self> {
        if intensities.len() != self.len() {
            return Err(Error::LengthMismatch(format!(
                "spectrum `{}`: {} values for a {}-point grid",
                self.id,
                intensities.len(),
                self.len()
            )));
        }
        if let Some(i) = intensities.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSpectrum {
                id: self.id.clone(),
                reason: format!("transform produced a non-finite value at index {i}"),
            });
        }
        Ok(Self {
            id: self.id.clone(),
            wavelengths: Arc::clone(&self.wavelengths),
            intensities,
            uniform: self.uniform,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn wavelengths(&self) -> &[T] {
        &self.wavelengths
    }

    pub fn grid(&self) -> &Arc<[T]> {
        &self.wavelengths
    }

    pub fn intensities(&self) -> &[T] {
        &self.intensities
    }

    pub fn into_intensities(self) -> Vec<T> {
        self.intensities
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    /// Mean grid step Δλ.
    pub fn grid_step(&self) -> T {
        let n = self.wavelengths.len();
        (self.wavelengths[n - 1] - self.wavelengths[0]) / T::from_usize_lossy(n - 1)
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Δλ, or `NonUniformGrid` naming `op` when the grid is not uniform.
    pub fn require_uniform(&self, op: &str) -> Result<T> {
        if self.uniform {
            Ok(self.grid_step())
        } else {
            Err(Error::NonUniformGrid(format!(
                "{op} needs a uniform grid but spectrum `{}` is not uniformly sampled",
                self.id
            )))
        }
    }
}

fn validate_grid<T: Real>(id: &str, grid: &[T]) -> Result<()> {
    if grid.len() < MIN_SPECTRUM_LEN {
        return Err(Error::InvalidSpectrum {
            id: id.to_string(),
            reason: format!("{} grid points, at least {MIN_SPECTRUM_LEN} required", grid.len()),
        });
    }
    if !all_finite(grid) {
        return Err(Error::InvalidSpectrum {
            id: id.to_string(),
            reason: "non-finite wavelength".into(),
        });
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonUniformGrid(format!(
            "spectrum `{id}`: wavelengths not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

pub(crate) fn grid_is_uniform<T: Real>(grid: &[T]) -> bool {
    let n = grid.len();
    if n < 2 {
        return true;
    }
    let step = (grid[n - 1] - grid[0]) / T::from_usize_lossy(n - 1);
    let tol = T::lit(UNIFORM_GRID_RTOL) * step.abs();
    grid.windows(2).all(|w| ((w[1] - w[0]) - step).abs() < tol)
}
