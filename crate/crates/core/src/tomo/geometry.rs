use std::f64::consts::PI;

use crate::error::{precondition, shape, Result};
use crate::scalar::Real;
use crate::tomo::ImageGrid;

/// 2D parallel-beam acquisition: view angles plus a flat detector row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGeometry {
    angles: Vec<f64>,
    n_det: usize,
    det_spacing: f64,
    det_offset: f64,
}

impl ScanGeometry {
    pub fn new(angles: Vec<f64>, n_det: usize, det_spacing: f64, det_offset: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(precondition("geometry needs at least one view"));
        }
        if n_det < 2 {
            return Err(precondition(format!(
                "geometry needs n_det >= 2, got {n_det}"
            )));
        }
        if !(det_spacing > 0.0 && det_spacing.is_finite()) {
            return Err(precondition(format!(
                "detector spacing must be positive, got {det_spacing}"
            )));
        }
        if !det_offset.is_finite() || angles.iter().any(|a| !a.is_finite()) {
            return Err(precondition("geometry values must be finite"));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(precondition("view angles must be strictly increasing"));
        }
        if angles[0] < 0.0 || *angles.last().unwrap() >= PI {
            return Err(precondition("view angles must lie in [0, pi)"));
        }
        Ok(Self {
            angles,
            n_det,
            det_spacing,
            det_offset,
        })
    }

    /// `n_views` equally spaced angles `i * pi / n_views`.
    pub fn parallel(n_views: usize, n_det: usize, det_spacing: f64) -> Result<Self> {
        let angles = (0..n_views)
            .map(|i| i as f64 * PI / n_views as f64)
            .collect();
        Self::new(angles, n_det, det_spacing, 0.0)
    }

    /// Detector row of `ceil(sqrt(2) * n)` pixel-sized bins, enough to cover the grid diagonal.
    pub fn for_grid(grid: &ImageGrid, n_views: usize) -> Result<Self> {
        let n_det = (std::f64::consts::SQRT_2 * grid.n() as f64).ceil() as usize;
        Self::parallel(n_views, n_det, grid.pixel_size())
    }

    #[inline]
    pub fn n_views(&self) -> usize {
        self.angles.len()
    }

    #[inline]
    pub fn n_det(&self) -> usize {
        self.n_det
    }

    #[inline]
    pub fn det_spacing(&self) -> f64 {
        self.det_spacing
    }

    #[inline]
    pub fn det_offset(&self) -> f64 {
        self.det_offset
    }

    #[inline]
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Signed detector coordinate of bin `k`.
    #[inline]
    pub fn det_position(&self, k: usize) -> f64 {
        (k as f64 - (self.n_det as f64 - 1.0) / 2.0) * self.det_spacing + self.det_offset
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.angles.len() * self.n_det
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Geometry restricted to the given (increasing) view indices.
    pub fn select_views(&self, views: &[usize]) -> Result<Self> {
        let angles = views
            .iter()
            .map(|&v| {
                self.angles
                    .get(v)
                    .copied()
                    .ok_or_else(|| precondition(format!("view {v} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(angles, self.n_det, self.det_spacing, self.det_offset)
    }

    /// Whether the detector row covers the whole grid at every angle.
    pub fn covers(&self, grid: &ImageGrid) -> bool {
        let half_row = self.n_det as f64 * self.det_spacing / 2.0 - self.det_offset.abs();
        let half_diag = std::f64::consts::SQRT_2 * grid.half_extent();
        half_row >= half_diag * (1.0 - 1e-9)
    }
}

/// Line-integral measurements, `n_views x n_det`, row-major by view.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<T> {
    geometry: ScanGeometry,
    values: Vec<T>,
}

impl<T: Real> Sinogram<T> {
    pub fn new(geometry: ScanGeometry, values: Vec<T>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(shape(format!(
                "sinogram of {}x{} needs {} values, got {}",
                geometry.n_views(),
                geometry.n_det(),
                geometry.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(precondition(format!(
                "non-finite sinogram entry at index {i}"
            )));
        }
        Ok(Self { geometry, values })
    }

    pub fn zeros(geometry: ScanGeometry) -> Self {
        let len = geometry.len();
        Self {
            geometry,
            values: vec![T::zero(); len],
        }
    }

    pub(crate) fn from_raw(geometry: ScanGeometry, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        Self { geometry, values }
    }

    #[inline]
    pub fn geometry(&self) -> &ScanGeometry {
        &self.geometry
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn n_views(&self) -> usize {
        self.geometry.n_views()
    }

    #[inline]
    pub fn n_det(&self) -> usize {
        self.geometry.n_det()
    }

    #[inline]
    pub fn get(&self, view: usize, det: usize) -> T {
        self.values[view * self.geometry.n_det() + det]
    }

    pub fn row(&self, view: usize) -> &[T] {
        let nd = self.geometry.n_det();
        &self.values[view * nd..(view + 1) * nd]
    }

    pub fn row_mut(&mut self, view: usize) -> &mut [T] {
        let nd = self.geometry.n_det();
        &mut self.values[view * nd..(view + 1) * nd]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.values.chunks_exact(self.geometry.n_det())
    }

    pub fn norm(&self) -> T {
        crate::scalar::norm2(&self.values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_raw(
            self.geometry.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(
            self.geometry.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn cast<U: Real>(&self) -> Sinogram<U> {
        Sinogram::from_raw(
            self.geometry.clone(),
            self.values.iter().map(|v| U::of(v.as_f64())).collect(),
        )
    }

    pub(crate) fn check_shape(&self, other_geometry: &ScanGeometry) -> Result<()> {
        if self.n_views() != other_geometry.n_views() || self.n_det() != other_geometry.n_det() {
            return Err(shape(format!(
                "sinogram is {}x{}, expected {}x{}",
                self.n_views(),
                self.n_det(),
                other_geometry.n_views(),
                other_geometry.n_det()
            )));
        }
        Ok(())
    }
}
