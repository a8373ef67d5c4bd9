use crate::error::{precondition, Result};
use crate::prior::{Denoiser, DiscreteDataset, PfgmConfig};
use crate::scalar::Real;
use crate::tomo::Image;

/// Weighting kernel of the posterior mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMode {
    /// PFGM++ kernel `(||x - y||^2 + r^2)^(-(N+D)/2)`, `r = sigma sqrt(D)`.
    #[default]
    Pfgm,
    /// `D -> infinity` limit: Gaussian `exp(-||x - y||^2 / (2 sigma^2))`.
    Gaussian,
}

/// Exact minimiser of the denoising loss over a discrete dataset.
#[derive(Debug, Clone)]
pub struct AnalyticDenoiser<T> {
    dataset: DiscreteDataset<T>,
    d: usize,
    mode: KernelMode,
}

impl<T: Real> AnalyticDenoiser<T> {
    pub fn new(dataset: DiscreteDataset<T>, cfg: &PfgmConfig) -> Self {
        Self {
            dataset,
            d: cfg.d,
            mode: KernelMode::Pfgm,
        }
    }

    pub fn gaussian(dataset: DiscreteDataset<T>) -> Self {
        Self {
            dataset,
            d: 1,
            mode: KernelMode::Gaussian,
        }
    }

    pub fn with_mode(mut self, mode: KernelMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn dataset(&self) -> &DiscreteDataset<T> {
        &self.dataset
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn augmentation_dim(&self) -> usize {
        self.d
    }

    fn sq_distances(&self, x: &Image<T>) -> Vec<f64> {
        self.dataset
            .images()
            .iter()
            .map(|y| {
                x.values()
                    .iter()
                    .zip(y.values())
                    .map(|(&a, &b)| (a.as_f64() - b.as_f64()).powi(2))
                    .sum()
            })
            .collect()
    }

    /// Unnormalised log-weights of every dataset point.
    pub fn log_weights(&self, x: &Image<T>, sigma: f64) -> Vec<f64> {
        let d2 = self.sq_distances(x);
        match self.mode {
            KernelMode::Pfgm => {
                let r2 = sigma * sigma * self.d as f64;
                let power = (self.dataset.dim() + self.d) as f64 / 2.0;
                d2.iter().map(|&q| -power * (q + r2).ln()).collect()
            }
            KernelMode::Gaussian => d2.iter().map(|&q| -q / (2.0 * sigma * sigma)).collect(),
        }
    }

    /// Normalised posterior weights, max-shifted in log space. Degenerate
    /// cases (zero noise, exact hits) put all mass on the nearest point,
    /// lowest index first.
    pub fn weights(&self, x: &Image<T>, sigma: f64) -> Vec<f64> {
        let logs = self.log_weights(x, sigma);
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let k = logs.len();
        if !max.is_finite() {
            let d2 = self.sq_distances(x);
            let nearest = (0..k).fold(0, |best, i| if d2[i] < d2[best] { i } else { best });
            let mut w = vec![0.0; k];
            w[nearest] = 1.0;
            return w;
        }
        let raw: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

impl<T: Real> Denoiser<T> for AnalyticDenoiser<T> {
    fn denoise(&self, x: &Image<T>, sigma: f64) -> Result<Image<T>> {
        x.check_grid(&self.dataset.grid())?;
        if !(sigma >= 0.0) {
            return Err(precondition(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        let w = self.weights(x, sigma);
        let mut acc = vec![0.0f64; x.values().len()];
        for (wk, y) in w.iter().zip(self.dataset.images()) {
            if *wk == 0.0 {
                continue;
            }
            for (a, &v) in acc.iter_mut().zip(y.values()) {
                *a += wk * v.as_f64();
            }
        }
        Ok(Image::from_raw(
            x.grid(),
            acc.into_iter().map(T::of).collect(),
        ))
    }
}
