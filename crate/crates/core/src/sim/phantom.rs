use rand::Rng;

use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid};

/// One additive ellipse in normalised coordinates, where `[-1, 1]` spans the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
    /// Counter-clockwise rotation in radians.
    pub rotation: f64,
    pub intensity: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        let (a, b) = self.semi_axes;
        (u / a).powi(2) + (v / b).powi(2) <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsePhantomSpec {
    pub ellipses: Vec<Ellipse>,
}

// (x0, y0, a, b, phi in degrees, intensity), modified head phantom with values in [0, 1]
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (0.0, 0.0, 0.69, 0.92, 0.0, 1.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.2),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.2),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.1),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.1),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.1),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.1),
    (0.0, -0.605, 0.023, 0.023, 0.0, 0.1),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.1),
];

impl EllipsePhantomSpec {
    pub fn new(ellipses: Vec<Ellipse>) -> crate::Result<Self> {
        if let Some(e) = ellipses
            .iter()
            .find(|e| !(e.semi_axes.0 > 0.0 && e.semi_axes.1 > 0.0))
        {
            return Err(crate::error::precondition(format!(
                "ellipse semi-axes must be positive, got {:?}",
                e.semi_axes
            )));
        }
        Ok(Self { ellipses })
    }

    /// The ten-ellipse head phantom.
    pub fn shepp_logan() -> Self {
        let ellipses = SHEPP_LOGAN
            .iter()
            .map(|&(x, y, a, b, phi, v)| Ellipse {
                center: (x, y),
                semi_axes: (a, b),
                rotation: phi.to_radians(),
                intensity: v,
            })
            .collect();
        Self { ellipses }
    }

    /// Random anatomical variant: the two skull ellipses are kept, every inner
    /// feature gets its position, size and contrast perturbed by up to `amount`.
    pub fn jittered<R: Rng + ?Sized>(&self, rng: &mut R, amount: f64) -> Self {
        let mut out = self.clone();
        for e in out.ellipses.iter_mut().skip(2) {
            let mut u = || rng.random_range(-1.0..=1.0);
            e.center.0 += 0.05 * amount * u();
            e.center.1 += 0.05 * amount * u();
            e.semi_axes.0 *= 1.0 + 0.2 * amount * u();
            e.semi_axes.1 *= 1.0 + 0.2 * amount * u();
            e.intensity *= 1.0 + amount * u();
        }
        out
    }

    /// Value at a point in normalised coordinates.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        self.ellipses
            .iter()
            .filter(|e| e.contains(x, y))
            .map(|e| e.intensity)
            .sum()
    }

    /// Samples the phantom at pixel centres.
    pub fn render<T: Real>(&self, grid: ImageGrid) -> Image<T> {
        let half = grid.half_extent();
        Image::from_fn(grid, |r, c| {
            let (x, y) = grid.pixel_center(r, c);
            T::of(self.value_at(x / half, y / half))
        })
    }
}

pub fn shepp_logan<T: Real>(grid: ImageGrid) -> Image<T> {
    EllipsePhantomSpec::shepp_logan().render(grid)
}
