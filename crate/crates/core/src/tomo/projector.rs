//! Joseph-style parallel-beam projector and its exact adjoint.
//!
//! Each ray is traversed along its dominant axis. At every row (or column)
//! crossed, the ray's intersection is linearly interpolated between the two
//! neighbouring pixels and weighted by the path length per step. Forward and
//! back projection both enumerate the same `(pixel, weight)` footprint, so the
//! pair is adjoint to rounding error.

use rayon::prelude::*;

use crate::error::{precondition, shape, Result};
use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid, ScanGeometry, Sinogram};

/// Views accumulated into one partial image during back projection. Fixed so
/// the reduction order does not depend on the thread count.
const VIEW_CHUNK: usize = 4;

/// System matrix `H` for one grid/geometry pair.
#[derive(Debug, Clone)]
pub struct Projector<T> {
    grid: ImageGrid,
    geometry: ScanGeometry,
    trig: Vec<(f64, f64)>,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> Projector<T> {
    pub fn new(grid: ImageGrid, geometry: ScanGeometry) -> Result<Self> {
        if !geometry.covers(&grid) {
            return Err(precondition(format!(
                "detector row ({} x {}) does not span the {}x{} grid diagonal",
                geometry.n_det(),
                geometry.det_spacing(),
                grid.n(),
                grid.n()
            )));
        }
        let trig = geometry
            .angles()
            .iter()
            .map(|a| (a.cos(), a.sin()))
            .collect();
        Ok(Self {
            grid,
            geometry,
            trig,
            _scalar: std::marker::PhantomData,
        })
    }

    #[inline]
    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    #[inline]
    pub fn geometry(&self) -> &ScanGeometry {
        &self.geometry
    }

    /// Visits every `(pixel index, weight)` pair of the ray `(view, det)`.
    pub fn ray_footprint(&self, view: usize, det: usize, mut visit: impl FnMut(usize, T)) {
        let n = self.grid.n();
        let ps = self.grid.pixel_size();
        let half = (n as f64 - 1.0) / 2.0;
        let (c, s) = self.trig[view];
        let t = self.geometry.det_position(det);
        let last = (n - 1) as f64;
        if c.abs() >= s.abs() {
            // Mostly vertical ray: one interpolation per image row.
            let w = ps / c.abs();
            for row in 0..n {
                let y = (half - row as f64) * ps;
                let u = (t - y * s) / c / ps + half;
                if u <= -1.0 || u >= last + 1.0 {
                    continue;
                }
                let c0 = u.floor();
                let f = u - c0;
                let base = row * n;
                if c0 >= 0.0 {
                    visit(base + c0 as usize, T::of((1.0 - f) * w));
                }
                if c0 + 1.0 <= last {
                    visit(base + (c0 + 1.0) as usize, T::of(f * w));
                }
            }
        } else {
            let w = ps / s.abs();
            for col in 0..n {
                let x = (col as f64 - half) * ps;
                let v = half - (t - x * c) / s / ps;
                if v <= -1.0 || v >= last + 1.0 {
                    continue;
                }
                let r0 = v.floor();
                let f = v - r0;
                if r0 >= 0.0 {
                    visit(r0 as usize * n + col, T::of((1.0 - f) * w));
                }
                if r0 + 1.0 <= last {
                    visit((r0 + 1.0) as usize * n + col, T::of(f * w));
                }
            }
        }
    }

    fn project_row(&self, img: &[T], view: usize, out: &mut [T]) {
        for (det, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            self.ray_footprint(view, det, |i, w| acc += w * img[i]);
            *o = acc;
        }
    }

    fn accumulate_row(&self, row: &[T], view: usize, acc: &mut [T]) {
        for (det, &p) in row.iter().enumerate() {
            if p != T::zero() {
                self.ray_footprint(view, det, |i, w| acc[i] += w * p);
            }
        }
    }

    /// `H x`
    pub fn forward(&self, img: &Image<T>) -> Result<Sinogram<T>> {
        img.check_grid(&self.grid)?;
        let nd = self.geometry.n_det();
        let mut values = vec![T::zero(); self.geometry.len()];
        values
            .par_chunks_mut(nd)
            .enumerate()
            .for_each(|(view, out)| self.project_row(img.values(), view, out));
        Ok(Sinogram::from_raw(self.geometry.clone(), values))
    }

    /// `H^T p`
    pub fn back(&self, sino: &Sinogram<T>) -> Result<Image<T>> {
        sino.check_shape(&self.geometry)?;
        let all: Vec<usize> = (0..self.geometry.n_views()).collect();
        let mut out = vec![T::zero(); self.grid.len()];
        self.back_views(sino.values(), &all, &mut out);
        Ok(Image::from_raw(self.grid, out))
    }

    /// Forward projects only `views`; `out` holds `views.len() * n_det` values.
    pub fn forward_views(&self, img: &[T], views: &[usize], out: &mut [T]) {
        let nd = self.geometry.n_det();
        assert_eq!(out.len(), views.len() * nd);
        out.par_chunks_mut(nd)
            .zip(views.par_iter())
            .for_each(|(o, &view)| self.project_row(img, view, o));
    }

    /// Adds `H_S^T data` into `acc`, where `data` holds one detector row per entry of `views`.
    pub fn back_views(&self, data: &[T], views: &[usize], acc: &mut [T]) {
        let nd = self.geometry.n_det();
        assert_eq!(data.len(), views.len() * nd);
        assert_eq!(acc.len(), self.grid.len());
        let partials: Vec<Vec<T>> = data
            .par_chunks(nd * VIEW_CHUNK)
            .zip(views.par_chunks(VIEW_CHUNK))
            .map(|(rows, vs)| {
                let mut buf = vec![T::zero(); self.grid.len()];
                for (row, &view) in rows.chunks_exact(nd).zip(vs) {
                    self.accumulate_row(row, view, &mut buf);
                }
                buf
            })
            .collect();
        for buf in partials {
            for (a, b) in acc.iter_mut().zip(buf) {
                *a += b;
            }
        }
    }

    /// Row sums of `H` for the given views (`H 1`).
    pub fn row_sums(&self, views: &[usize]) -> Vec<T> {
        let ones = vec![T::one(); self.grid.len()];
        let mut out = vec![T::zero(); views.len() * self.geometry.n_det()];
        self.forward_views(&ones, views, &mut out);
        out
    }

    /// Column sums of `H` restricted to the given views (`H^T 1`).
    pub fn column_sums(&self, views: &[usize]) -> Vec<T> {
        let ones = vec![T::one(); views.len() * self.geometry.n_det()];
        let mut out = vec![T::zero(); self.grid.len()];
        self.back_views(&ones, views, &mut out);
        out
    }

    pub(crate) fn check_sinogram(&self, sino: &Sinogram<T>) -> Result<()> {
        if sino.geometry() != &self.geometry {
            sino.check_shape(&self.geometry)?;
            return Err(shape("sinogram geometry differs from projector geometry"));
        }
        Ok(())
    }
}

/// Line integrals of `img` along every ray of `geo`.
pub fn forward_project<T: Real>(img: &Image<T>, geo: &ScanGeometry) -> Result<Sinogram<T>> {
    Projector::new(img.grid(), geo.clone())?.forward(img)
}

/// Exact adjoint of [`forward_project`].
pub fn back_project<T: Real>(sino: &Sinogram<T>, grid: ImageGrid) -> Result<Image<T>> {
    Projector::new(grid, sino.geometry().clone())?.back(sino)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(grid: ImageGrid, radius: f64, value: f64) -> Image<f64> {
        // 8x8 supersampled coverage keeps the rasterised disc area accurate
        let ss = 8;
        Image::from_fn(grid, |r, c| {
            let (x0, y0) = grid.pixel_center(r, c);
            let ps = grid.pixel_size();
            let mut hits = 0;
            for a in 0..ss {
                for b in 0..ss {
                    let x = x0 + ((a as f64 + 0.5) / ss as f64 - 0.5) * ps;
                    let y = y0 + ((b as f64 + 0.5) / ss as f64 - 0.5) * ps;
                    if x * x + y * y <= radius * radius {
                        hits += 1;
                    }
                }
            }
            value * hits as f64 / (ss * ss) as f64
        })
    }

    fn random_image(grid: ImageGrid, rng: &mut ChaCha8Rng) -> Image<f64> {
        Image::from_fn(grid, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_image_projects_to_zero() {
        let grid = ImageGrid::new(16, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 12).unwrap();
        let sino = forward_project(&Image::<f64>::zeros(grid), &geo).unwrap();
        assert!(sino.values().iter().all(|&v| v == 0.0));
        let back = back_project(&Sinogram::<f64>::zeros(geo), grid).unwrap();
        assert!(back.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn central_ray_through_disc_is_its_diameter() {
        let grid = ImageGrid::new(64, 0.5).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 16).unwrap();
        let r = 10.0;
        let sino = forward_project(&disc(grid, r, 1.0), &geo).unwrap();
        // odd detector count (91) puts the middle bin on the axis
        assert_eq!(geo.n_det() % 2, 1);
        let mid = geo.n_det() / 2;
        for v in 0..geo.n_views() {
            let chord = sino.get(v, mid);
            assert!(
                (chord - 2.0 * r).abs() <= 0.02 * 2.0 * r,
                "view {v}: {chord}"
            );
        }
    }

    #[test]
    fn centred_disc_profile_is_view_independent() {
        let grid = ImageGrid::new(64, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 30).unwrap();
        let sino = forward_project(&disc(grid, 20.0, 1.0), &geo).unwrap();
        let peak = sino.values().iter().cloned().fold(0.0, f64::max);
        for k in 0..geo.n_det() {
            let col: Vec<f64> = (0..geo.n_views()).map(|v| sino.get(v, k)).collect();
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo <= 0.02 * peak, "detector {k}: spread {}", hi - lo);
        }
    }

    #[test]
    fn adjoint_identity_64() {
        let grid = ImageGrid::new(64, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 45).unwrap();
        let proj = Projector::new(grid, geo.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = random_image(grid, &mut rng);
        let y = Sinogram::new(
            geo.clone(),
            (0..geo.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        let hx = proj.forward(&x).unwrap();
        let hty = proj.back(&y).unwrap();
        let lhs = crate::scalar::dot(hx.values(), y.values());
        let rhs = x.dot(&hty);
        assert!(
            (lhs - rhs).abs() <= 1e-6 * lhs.abs().max(rhs.abs()),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn single_ray_back_projection_touches_only_its_footprint() {
        let grid = ImageGrid::new(16, 1.0).unwrap();
        let geo = ScanGeometry::new(vec![0.3], 23, 1.0, 0.0).unwrap();
        let proj = Projector::<f64>::new(grid, geo.clone()).unwrap();
        let det = 14;
        let mut sino = Sinogram::zeros(geo);
        sino.values_mut()[det] = 1.0;
        let img = proj.back(&sino).unwrap();

        // independent trace: pixel is touched iff its centre lies within one
        // pixel (along x) of the ray at that row, for this mostly-vertical ray
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let t = proj.geometry().det_position(det);
        for r in 0..16 {
            for col in 0..16 {
                let (x, y) = grid.pixel_center(r, col);
                let ray_x = (t - y * s) / c;
                let near = (ray_x - x).abs() < 1.0;
                let v = img.get(r, col);
                if near {
                    assert!(v >= 0.0);
                } else {
                    assert_eq!(v, 0.0, "pixel ({r},{col}) should be untouched");
                }
            }
        }
        assert!(img.values().iter().any(|&v| v > 0.0));
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let grid = ImageGrid::new(8, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 4).unwrap();
        let proj = Projector::<f64>::new(grid, geo.clone()).unwrap();
        let other = Image::<f64>::zeros(ImageGrid::new(9, 1.0).unwrap());
        assert!(matches!(proj.forward(&other), Err(crate::Error::Shape(_))));
        let short = ScanGeometry::parallel(4, 5, 1.0).unwrap();
        assert!(Projector::<f64>::new(grid, short).is_err());
    }

    #[test]
    fn projection_is_deterministic() {
        let grid = ImageGrid::new(32, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 37).unwrap();
        let proj = Projector::new(grid, geo).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_image(grid, &mut rng);
        let a = proj.back(&proj.forward(&x).unwrap()).unwrap();
        let b = proj.back(&proj.forward(&x).unwrap()).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn works_in_single_precision() {
        let grid = ImageGrid::new(16, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 8).unwrap();
        let img = Image::<f32>::filled(grid, 1.0);
        let sino = forward_project(&img, &geo).unwrap();
        let mid = geo.n_det() / 2;
        // view 0 integrates a full column of 16 unit pixels
        assert!((sino.get(0, mid) - 16.0).abs() < 1e-3);
    }
}
