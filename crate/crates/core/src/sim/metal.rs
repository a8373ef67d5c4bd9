use std::str::FromStr;

use crate::error::{config, precondition, Error, Result};
use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid, Projector, ScanGeometry, Sinogram};

/// Value written into voided in-trace bins.
pub const VOID_SENTINEL: f64 = 0.0;

/// A metal insert in normalised coordinates (`[-1, 1]` spans the grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetalDisc {
    pub center: (f64, f64),
    pub radius: f64,
    pub intensity: f64,
}

/// Pixels occupied by metal.
#[derive(Debug, Clone, PartialEq)]
pub struct MetalMask {
    grid: ImageGrid,
    mask: Vec<bool>,
}

impl MetalMask {
    pub fn new(grid: ImageGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::Shape(format!(
                "mask needs {} entries, got {}",
                grid.len(),
                mask.len()
            )));
        }
        Ok(Self { grid, mask })
    }

    pub fn empty(grid: ImageGrid) -> Self {
        Self {
            grid,
            mask: vec![false; grid.len()],
        }
    }

    pub fn grid(&self) -> ImageGrid {
        self.grid
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    pub fn to_image<T: Real>(&self) -> Image<T> {
        Image::from_raw(
            self.grid,
            self.mask
                .iter()
                .map(|&m| if m { T::one() } else { T::zero() })
                .collect(),
        )
    }
}

/// Sinogram bins whose rays cross metal.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMask {
    n_views: usize,
    n_det: usize,
    mask: Vec<bool>,
}

impl TraceMask {
    pub fn new(n_views: usize, n_det: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != n_views * n_det {
            return Err(Error::Shape(format!(
                "trace needs {} entries, got {}",
                n_views * n_det,
                mask.len()
            )));
        }
        Ok(Self {
            n_views,
            n_det,
            mask,
        })
    }

    pub fn empty(geo: &ScanGeometry) -> Self {
        Self {
            n_views: geo.n_views(),
            n_det: geo.n_det(),
            mask: vec![false; geo.len()],
        }
    }

    pub fn n_views(&self) -> usize {
        self.n_views
    }

    pub fn n_det(&self) -> usize {
        self.n_det
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn row(&self, view: usize) -> &[bool] {
        &self.mask[view * self.n_det..(view + 1) * self.n_det]
    }

    pub fn get(&self, view: usize, det: usize) -> bool {
        self.mask[view * self.n_det + det]
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub(crate) fn check<T: Real>(&self, sino: &Sinogram<T>) -> Result<()> {
        if self.n_views != sino.n_views() || self.n_det != sino.n_det() {
            return Err(Error::Shape(format!(
                "trace is {}x{}, sinogram is {}x{}",
                self.n_views,
                self.n_det,
                sino.n_views(),
                sino.n_det()
            )));
        }
        Ok(())
    }
}

/// Stamps metal discs into the image; the mask marks exactly the stamped pixels.
pub fn insert_metal<T: Real>(img: &Image<T>, discs: &[MetalDisc]) -> Result<(Image<T>, MetalMask)> {
    let grid = img.grid();
    for d in discs {
        if !(d.radius > 0.0) {
            return Err(precondition(format!(
                "metal radius must be positive, got {}",
                d.radius
            )));
        }
        let (x, y) = d.center;
        if x - d.radius < -1.0 || x + d.radius > 1.0 || y - d.radius < -1.0 || y + d.radius > 1.0 {
            return Err(precondition(format!("metal disc {d:?} leaves the grid")));
        }
    }
    let half = grid.half_extent();
    let mut out = img.clone();
    let mut mask = MetalMask::empty(grid);
    for r in 0..grid.n() {
        for c in 0..grid.n() {
            let (x, y) = grid.pixel_center(r, c);
            let (x, y) = (x / half, y / half);
            // later discs win where they overlap
            if let Some(d) = discs.iter().rev().find(|d| {
                (x - d.center.0).powi(2) + (y - d.center.1).powi(2) <= d.radius * d.radius
            }) {
                out.set(r, c, T::of(d.intensity));
                mask.mask[r * grid.n() + c] = true;
            }
        }
    }
    Ok((out, mask))
}

/// Rays that touch the metal mask, dilated by `margin` detector bins.
pub fn compute_trace(mask: &MetalMask, geo: &ScanGeometry, margin: usize) -> Result<TraceMask> {
    let proj = Projector::<f64>::new(mask.grid(), geo.clone())?;
    let sino = proj.forward(&mask.to_image())?;
    let nd = geo.n_det();
    let mut trace = TraceMask::empty(geo);
    for (view, row) in sino.rows().enumerate() {
        for (k, _) in row.iter().enumerate().filter(|(_, &v)| v > 0.0) {
            let lo = k.saturating_sub(margin);
            let hi = (k + margin).min(nd - 1);
            trace.mask[view * nd + lo..=view * nd + hi]
                .iter_mut()
                .for_each(|m| *m = true);
        }
    }
    Ok(trace)
}

/// How in-trace measurements are destroyed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorruptionMode {
    /// Photon starvation: every in-trace bin reads the largest measurable
    /// line integral `-ln(1 / I0)`.
    Saturate { i0: f64 },
    /// Missing data, marked with [`VOID_SENTINEL`].
    Void,
}

impl FromStr for CorruptionMode {
    type Err = Error;

    /// `saturate` (with I0 = 1e5), `saturate:<i0>` or `void`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "void" => Ok(Self::Void),
            None if s == "saturate" => Ok(Self::Saturate { i0: 1e5 }),
            Some(("saturate", i0)) => {
                let i0: f64 = i0
                    .parse()
                    .map_err(|_| config(format!("bad I0 in mode {s:?}")))?;
                if !(i0 > 1.0) {
                    return Err(config(format!("saturation I0 must exceed 1, got {i0}")));
                }
                Ok(Self::Saturate { i0 })
            }
            _ => Err(config(format!("unknown corruption mode {s:?}"))),
        }
    }
}

pub fn corrupt_metal_sinogram<T: Real>(
    sino: &Sinogram<T>,
    trace: &TraceMask,
    mode: CorruptionMode,
) -> Result<Sinogram<T>> {
    trace.check(sino)?;
    let fill = match mode {
        CorruptionMode::Saturate { i0 } => T::of(-(1.0 / i0).ln()),
        CorruptionMode::Void => T::of(VOID_SENTINEL),
    };
    let mut out = sino.clone();
    for (v, &m) in out.values_mut().iter_mut().zip(trace.as_slice()) {
        if m {
            *v = fill;
        }
    }
    Ok(out)
}
