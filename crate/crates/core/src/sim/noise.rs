use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{precondition, Result};
use crate::scalar::Real;
use crate::tomo::Sinogram;

/// Monochromatic Poisson photon-count model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Incident photons per ray at full dose.
    pub i0: f64,
    /// Fraction of the full-dose photon budget actually delivered.
    pub dose_fraction: f64,
    pub seed: u64,
}

impl NoiseModel {
    /// Quarter-dose acquisition at the given full-dose count.
    pub fn quarter_dose(i0: f64, seed: u64) -> Self {
        Self {
            i0,
            dose_fraction: 0.25,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.i0 > 0.0 && self.i0.is_finite()) {
            return Err(precondition(format!(
                "I0 must be positive, got {}",
                self.i0
            )));
        }
        if !(self.dose_fraction > 0.0 && self.dose_fraction <= 1.0) {
            return Err(precondition(format!(
                "dose fraction must be in (0, 1], got {}",
                self.dose_fraction
            )));
        }
        Ok(())
    }

    /// Expected counts behind a line integral `p`.
    pub fn expected_counts(&self, p: f64) -> f64 {
        self.dose_fraction * self.i0 * (-p).exp()
    }
}

/// Replaces each line integral by the log of a Poisson count draw.
///
/// Zero counts are clamped to one before the log.
pub fn apply_low_dose<T: Real>(sino: &Sinogram<T>, nm: &NoiseModel) -> Result<Sinogram<T>> {
    nm.validate()?;
    if let Some(i) = sino.values().iter().position(|&v| v < T::zero()) {
        return Err(precondition(format!("negative line integral at index {i}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(nm.seed);
    let blank = nm.dose_fraction * nm.i0;
    let mut noisy = sino.clone();
    for v in noisy.values_mut() {
        let p = *v;
        let lambda = nm.expected_counts(p.as_f64());
        let counts = if lambda > 0.0 {
            Poisson::new(lambda)
                .map(|d| d.sample(&mut rng))
                .unwrap_or(0.0)
        } else {
            0.0
        };
        *v = T::of(-(counts.max(1.0) / blank).ln());
    }
    Ok(noisy)
}

/// View indices `floor(i * n_views / n_keep)` for `i < n_keep`.
pub fn subsample_indices(n_views: usize, n_keep: usize) -> Result<Vec<usize>> {
    if n_keep == 0 || n_keep > n_views {
        return Err(precondition(format!(
            "cannot keep {n_keep} of {n_views} views"
        )));
    }
    Ok((0..n_keep).map(|i| i * n_views / n_keep).collect())
}

/// Uniform angular undersampling.
pub fn subsample_views<T: Real>(sino: &Sinogram<T>, n_keep: usize) -> Result<Sinogram<T>> {
    let keep = subsample_indices(sino.n_views(), n_keep)?;
    let geometry = sino.geometry().select_views(&keep)?;
    let values = keep
        .iter()
        .flat_map(|&v| sino.row(v).iter().copied())
        .collect();
    Sinogram::new(geometry, values)
}
