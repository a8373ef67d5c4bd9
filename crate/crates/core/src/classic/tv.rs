//! Isotropic total-variation denoising by Chambolle's dual projection.

use crate::scalar::Real;
use crate::tomo::Image;

/// Dual ascent step.
const TAU: f64 = 0.25;

/// Forward differences with a zero last row/column (Neumann boundary).
fn gradient<T: Real>(u: &[T], n: usize, gx: &mut [T], gy: &mut [T]) {
    for r in 0..n {
        for c in 0..n {
            let i = r * n + c;
            gx[i] = if c + 1 < n {
                u[i + 1] - u[i]
            } else {
                T::zero()
            };
            gy[i] = if r + 1 < n {
                u[i + n] - u[i]
            } else {
                T::zero()
            };
        }
    }
}

/// Negative adjoint of [`gradient`].
fn divergence<T: Real>(px: &[T], py: &[T], n: usize, out: &mut [T]) {
    for r in 0..n {
        for c in 0..n {
            let i = r * n + c;
            let dx = if c == 0 {
                px[i]
            } else if c + 1 == n {
                -px[i - 1]
            } else {
                px[i] - px[i - 1]
            };
            let dy = if r == 0 {
                py[i]
            } else if r + 1 == n {
                -py[i - n]
            } else {
                py[i] - py[i - n]
            };
            out[i] = dx + dy;
        }
    }
}

pub fn total_variation<T: Real>(img: &Image<T>) -> T {
    let n = img.n();
    let len = n * n;
    let (mut gx, mut gy) = (vec![T::zero(); len], vec![T::zero(); len]);
    gradient(img.values(), n, &mut gx, &mut gy);
    gx.iter()
        .zip(&gy)
        .map(|(&a, &b)| (a * a + b * b).sqrt())
        .sum()
}

/// `1/2 ||z - y||^2 + lambda TV(z)`
pub fn rof_objective<T: Real>(z: &Image<T>, y: &Image<T>, lambda: T) -> T {
    let fit = z
        .values()
        .iter()
        .zip(y.values())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>();
    fit / T::of(2.0) + lambda * total_variation(z)
}

/// Approximate ROF minimiser after `iters` dual iterations.
///
/// The result is clipped to the range of `y` (which can only lower the
/// objective) and never scores worse than `y` itself.
pub fn tv_denoise<T: Real>(y: &Image<T>, lambda: T, iters: usize) -> Image<T> {
    if lambda <= T::zero() || iters == 0 {
        return y.clone();
    }
    let n = y.n();
    let len = n * n;
    let tau = T::of(TAU);
    let (mut px, mut py) = (vec![T::zero(); len], vec![T::zero(); len]);
    let (mut gx, mut gy) = (vec![T::zero(); len], vec![T::zero(); len]);
    let mut div = vec![T::zero(); len];
    let mut work = vec![T::zero(); len];
    for _ in 0..iters {
        divergence(&px, &py, n, &mut div);
        for ((w, &d), &yv) in work.iter_mut().zip(&div).zip(y.values()) {
            *w = d - yv / lambda;
        }
        gradient(&work, n, &mut gx, &mut gy);
        for i in 0..len {
            let mag = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
            let denom = T::one() + tau * mag;
            px[i] = (px[i] + tau * gx[i]) / denom;
            py[i] = (py[i] + tau * gy[i]) / denom;
        }
    }
    divergence(&px, &py, n, &mut div);
    let (lo, hi) = y.min_max();
    let z = Image::from_raw(
        y.grid(),
        y.values()
            .iter()
            .zip(&div)
            .map(|(&yv, &d)| (yv - lambda * d).max(lo).min(hi))
            .collect(),
    );
    if rof_objective(&z, y, lambda) <= rof_objective(y, y, lambda) {
        z
    } else {
        y.clone()
    }
}
