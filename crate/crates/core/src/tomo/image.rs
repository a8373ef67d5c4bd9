use crate::error::{precondition, shape, Result};
use crate::scalar::{dot, Real};

/// Square pixel grid centred on the rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    n: usize,
    pixel_size: f64,
}

impl ImageGrid {
    pub fn new(n: usize, pixel_size: f64) -> Result<Self> {
        if n < 2 {
            return Err(precondition(format!("grid needs n >= 2, got {n}")));
        }
        if !(pixel_size > 0.0 && pixel_size.is_finite()) {
            return Err(precondition(format!(
                "pixel size must be positive, got {pixel_size}"
            )));
        }
        Ok(Self { n, pixel_size })
    }

    /// Grid of `n` pixels covering a field of view of width `fov`.
    pub fn with_fov(n: usize, fov: f64) -> Result<Self> {
        Self::new(n, fov / n.max(1) as f64)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical centre `(x, y)` of pixel `(row, col)`; row 0 is the top (largest y).
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let half = (self.n as f64 - 1.0) / 2.0;
        (
            (col as f64 - half) * self.pixel_size,
            (half - row as f64) * self.pixel_size,
        )
    }

    /// Half width of the square field of view.
    pub fn half_extent(&self) -> f64 {
        self.n as f64 * self.pixel_size / 2.0
    }
}

/// Attenuation map on an [`ImageGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    grid: ImageGrid,
    values: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(grid: ImageGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(shape(format!(
                "image of {}x{} needs {} values, got {}",
                grid.n(),
                grid.n(),
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(precondition(format!("non-finite pixel at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: ImageGrid) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn filled(grid: ImageGrid, v: T) -> Self {
        Self {
            grid,
            values: vec![v; grid.len()],
        }
    }

    pub fn from_fn(grid: ImageGrid, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for r in 0..n {
            for c in 0..n {
                values.push(f(r, c));
            }
        }
        Self { grid, values }
    }

    /// Wraps values without the finiteness scan; callers guarantee the length.
    pub(crate) fn from_raw(grid: ImageGrid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> ImageGrid {
        self.grid
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
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
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.grid.n() + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        let n = self.grid.n();
        self.values[row * n + col] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: T) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.values, &other.values)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (T, T) {
        self.values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::of_usize(self.values.len())
    }

    pub fn cast<U: Real>(&self) -> Image<U> {
        Image::from_raw(
            self.grid,
            self.values.iter().map(|v| U::of(v.as_f64())).collect(),
        )
    }

    pub(crate) fn check_grid(&self, grid: &ImageGrid) -> Result<()> {
        if self.grid.n() != grid.n() {
            return Err(shape(format!(
                "image is {}x{}, expected {}x{}",
                self.n(),
                self.n(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(())
    }
}
