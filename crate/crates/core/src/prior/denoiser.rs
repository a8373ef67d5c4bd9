use crate::error::{precondition, Result};
use crate::scalar::Real;
use crate::tomo::Image;

/// A map `f(x, sigma)` estimating the clean image behind `x` at noise level `sigma`.
pub trait Denoiser<T: Real>: Sync {
    fn denoise(&self, x: &Image<T>, sigma: f64) -> Result<Image<T>>;
}

impl<T: Real, D: Denoiser<T> + ?Sized> Denoiser<T> for &D {
    fn denoise(&self, x: &Image<T>, sigma: f64) -> Result<Image<T>> {
        (**self).denoise(x, sigma)
    }
}

impl<T: Real, D: Denoiser<T> + ?Sized + Send> Denoiser<T> for Box<D> {
    fn denoise(&self, x: &Image<T>, sigma: f64) -> Result<Image<T>> {
        (**self).denoise(x, sigma)
    }
}

/// Returns its input.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDenoiser;

impl<T: Real> Denoiser<T> for IdentityDenoiser {
    fn denoise(&self, x: &Image<T>, _sigma: f64) -> Result<Image<T>> {
        Ok(x.clone())
    }
}

/// Score estimate `(f(x, sigma) - x) / sigma^2`.
pub fn score<T: Real>(f: &impl Denoiser<T>, x: &Image<T>, sigma: f64) -> Result<Image<T>> {
    if !(sigma > 0.0) {
        return Err(precondition(format!("score needs sigma > 0, got {sigma}")));
    }
    let mut s = f.denoise(x, sigma)?.sub(x);
    s.scale(T::of(1.0 / (sigma * sigma)));
    Ok(s)
}
