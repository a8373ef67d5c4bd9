use crate::error::{precondition, Result};
use crate::scalar::Real;
use crate::tomo::Image;

fn mse<T: Real>(x: &Image<T>, reference: &Image<T>) -> Result<f64> {
    x.check_grid(&reference.grid())?;
    let sum: f64 = x
        .values()
        .iter()
        .zip(reference.values())
        .map(|(&a, &b)| (a.as_f64() - b.as_f64()).powi(2))
        .sum();
    Ok(sum / x.values().len() as f64)
}

pub fn rmse<T: Real>(x: &Image<T>, reference: &Image<T>) -> Result<f64> {
    Ok(mse(x, reference)?.sqrt())
}

/// `10 log10(range^2 / MSE)`; identical images give `f64::INFINITY`.
pub fn psnr<T: Real>(x: &Image<T>, reference: &Image<T>, data_range: f64) -> Result<f64> {
    if !(data_range > 0.0) {
        return Err(precondition(format!(
            "data range must be positive, got {data_range}"
        )));
    }
    let m = mse(x, reference)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (data_range * data_range / m).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    pub data_range: f64,
}

impl SsimParams {
    pub fn with_range(data_range: f64) -> Self {
        Self {
            window: 8,
            k1: 0.01,
            k2: 0.03,
            data_range,
        }
    }
}

/// Mean SSIM over non-overlapping square windows; a trailing partial strip is ignored.
pub fn ssim<T: Real>(x: &Image<T>, reference: &Image<T>, p: &SsimParams) -> Result<f64> {
    x.check_grid(&reference.grid())?;
    let n = x.n();
    if p.window == 0 || n < p.window {
        return Err(precondition(format!(
            "image side {n} is smaller than the window {}",
            p.window
        )));
    }
    if !(p.data_range > 0.0) {
        return Err(precondition(format!(
            "data range must be positive, got {}",
            p.data_range
        )));
    }
    let c1 = (p.k1 * p.data_range).powi(2);
    let c2 = (p.k2 * p.data_range).powi(2);
    let w = p.window;
    let count = (w * w) as f64;
    let (xs, ys) = (x.values(), reference.values());
    let blocks = n / w;
    let mut total = 0.0;
    for br in 0..blocks {
        for bc in 0..blocks {
            let idx =
                || (0..w).flat_map(move |r| (0..w).map(move |c| (br * w + r) * n + bc * w + c));
            let mx = idx().map(|i| xs[i].as_f64()).sum::<f64>() / count;
            let my = idx().map(|i| ys[i].as_f64()).sum::<f64>() / count;
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for i in idx() {
                let (a, b) = (xs[i].as_f64() - mx, ys[i].as_f64() - my);
                vx += a * a;
                vy += b * b;
                cov += a * b;
            }
            let (vx, vy, cov) = (vx / count, vy / count, cov / count);
            total += (2.0 * mx * my + c1) * (2.0 * cov + c2)
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    Ok(total / (blocks * blocks) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub rmse: f64,
}

impl MetricReport {
    pub fn compute<T: Real>(x: &Image<T>, reference: &Image<T>, data_range: f64) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(x, reference, data_range)?,
            ssim: ssim(x, reference, &SsimParams::with_range(data_range))?,
            rmse: rmse(x, reference)?,
        })
    }
}
