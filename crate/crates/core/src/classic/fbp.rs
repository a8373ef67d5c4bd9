use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{config, precondition, Error, Result};
use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid, Sinogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterKind {
    /// Pure ramp, `|f|` up to Nyquist.
    #[default]
    RamLak,
    /// Ramp with a Hann roll-off reaching zero at Nyquist.
    Hann,
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ram-lak" | "ramlak" => Ok(Self::RamLak),
            "hann" | "hann-apodized" => Ok(Self::Hann),
            _ => Err(config(format!("unknown filter {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Zero-padded row length; `None` picks the next power of two `>= 2 n_det`.
    pub padding: Option<usize>,
}

impl FilterSpec {
    pub fn ram_lak() -> Self {
        Self {
            kind: FilterKind::RamLak,
            padding: None,
        }
    }

    pub fn hann() -> Self {
        Self {
            kind: FilterKind::Hann,
            padding: None,
        }
    }

    fn padded_len(&self, n_det: usize) -> Result<usize> {
        let min = 2 * n_det;
        match self.padding {
            None => Ok(min.next_power_of_two()),
            Some(p) if p >= min && p.is_power_of_two() => Ok(p),
            Some(p) => Err(precondition(format!(
                "filter padding must be a power of two >= {min}, got {p}"
            ))),
        }
    }

    /// Frequency response sampled on the padded FFT grid. Built from the
    /// band-limited spatial ramp kernel so the DC term is exact.
    fn response(&self, len: usize, tau: f64) -> Vec<f64> {
        let mut kernel = vec![Complex::new(0.0, 0.0); len];
        for (i, k) in kernel.iter_mut().enumerate() {
            let m = if i <= len / 2 {
                i as i64
            } else {
                i as i64 - len as i64
            };
            let v = if m == 0 {
                1.0 / (4.0 * tau * tau)
            } else if m % 2 != 0 {
                -1.0 / (PI * PI * (m * m) as f64 * tau * tau)
            } else {
                0.0
            };
            *k = Complex::new(v, 0.0);
        }
        FftPlanner::<f64>::new()
            .plan_fft_forward(len)
            .process(&mut kernel);
        kernel
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let m = if i <= len / 2 {
                    i as f64
                } else {
                    i as f64 - len as f64
                };
                let window = match self.kind {
                    FilterKind::RamLak => 1.0,
                    FilterKind::Hann => 0.5 * (1.0 + (PI * m / (len as f64 / 2.0)).cos()),
                };
                h.re * window
            })
            .collect()
    }
}

/// Ramp-filters every view. The result is in image units per detector bin.
pub(crate) fn filter_sinogram<T: Real>(sino: &Sinogram<T>, f: &FilterSpec) -> Result<Sinogram<T>> {
    let nd = sino.n_det();
    let len = f.padded_len(nd)?;
    let tau = sino.geometry().det_spacing();
    let response = f.response(len, tau);
    let fft = FftPlanner::<f64>::new();
    let (fwd, inv) = {
        let mut planner = fft;
        (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
    };
    let mut out = sino.clone();
    out.values_mut().par_chunks_mut(nd).for_each(|row| {
        let mut buf: Vec<Complex<f64>> = row
            .iter()
            .map(|v| Complex::new(v.as_f64(), 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(len)
            .collect();
        fwd.process(&mut buf);
        for (b, &h) in buf.iter_mut().zip(&response) {
            *b *= h;
        }
        inv.process(&mut buf);
        // inverse FFT is unnormalised; tau turns the discrete sum into the convolution integral
        let scale = tau / len as f64;
        for (r, b) in row.iter_mut().zip(&buf) {
            *r = T::of(b.re * scale);
        }
    });
    Ok(out)
}

/// Filtered back projection.
///
/// The filtered views are back projected pixel-driven: each pixel centre is
/// projected onto the detector and the filtered row is linearly interpolated
/// there. Unlike the Joseph adjoint, this keeps a uniform gain across pixels.
pub fn fbp<T: Real>(sino: &Sinogram<T>, grid: ImageGrid, f: &FilterSpec) -> Result<Image<T>> {
    let geo = sino.geometry();
    if !geo.covers(&grid) {
        return Err(precondition("detector row does not span the grid diagonal"));
    }
    let filtered = filter_sinogram(sino, f)?;
    let n = grid.n();
    let nd = geo.n_det();
    let trig: Vec<(f64, f64)> = geo.angles().iter().map(|a| (a.cos(), a.sin())).collect();
    let centre = (nd as f64 - 1.0) / 2.0;
    let scale = PI / geo.n_views() as f64;
    let mut values = vec![T::zero(); grid.len()];
    values.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        for (c, out) in row.iter_mut().enumerate() {
            let (x, y) = grid.pixel_center(r, c);
            let mut acc = 0.0;
            for (view, &(cs, sn)) in trig.iter().enumerate() {
                let u = (x * cs + y * sn - geo.det_offset()) / geo.det_spacing() + centre;
                let k = u.floor();
                let w = u - k;
                let q = filtered.row(view);
                let at = |i: f64| {
                    if i >= 0.0 && i < nd as f64 {
                        q[i as usize].as_f64()
                    } else {
                        0.0
                    }
                };
                acc += (1.0 - w) * at(k) + w * at(k + 1.0);
            }
            *out = T::of(acc * scale);
        }
    });
    Ok(Image::from_raw(grid, values))
}
