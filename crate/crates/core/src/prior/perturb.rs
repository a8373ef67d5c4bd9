use rand::Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};

use crate::prior::PfgmConfig;
use crate::scalar::Real;
use crate::tomo::Image;

/// `ln sigma ~ Normal(p_mean, p_std^2)`.
pub fn sample_sigma<R: Rng + ?Sized>(cfg: &PfgmConfig, rng: &mut R) -> f64 {
    if cfg.p_std == 0.0 {
        return cfg.p_mean.exp();
    }
    let normal = Normal::new(cfg.p_mean, cfg.p_std).expect("p_std is finite and positive");
    normal.sample(rng).exp()
}

/// `R = sigma sqrt(D) sqrt(beta / (1 - beta))`.
pub fn radius_from_beta(sigma: f64, beta: f64, d: usize) -> f64 {
    sigma * (d as f64).sqrt() * (beta / (1.0 - beta)).sqrt()
}

/// Perturbation radius with `beta ~ Beta(N/2, D/2)`.
pub fn sample_radius<R: Rng + ?Sized>(sigma: f64, cfg: &PfgmConfig, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let beta = Beta::new(cfg.n as f64 / 2.0, cfg.d as f64 / 2.0).expect("N and D are positive");
    radius_from_beta(sigma, beta.sample(rng), cfg.d)
}

/// Uniform direction on the unit sphere in `R^n`.
pub fn unit_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return u.into_iter().map(|v| v / norm).collect();
        }
    }
}

#[derive(Debug, Clone)]
pub struct Perturbed<T> {
    pub image: Image<T>,
    pub radius: f64,
}

/// `y + R v` with `v` uniform on the unit sphere and `R` from [`sample_radius`].
pub fn perturb<T: Real, R: Rng + ?Sized>(
    y: &Image<T>,
    sigma: f64,
    cfg: &PfgmConfig,
    rng: &mut R,
) -> Perturbed<T> {
    let radius = sample_radius(sigma, cfg, rng);
    perturb_with_radius(y, radius, rng)
}

pub(crate) fn perturb_with_radius<T: Real, R: Rng + ?Sized>(
    y: &Image<T>,
    radius: f64,
    rng: &mut R,
) -> Perturbed<T> {
    let v = unit_direction(y.values().len(), rng);
    let image = Image::from_raw(
        y.grid(),
        y.values()
            .iter()
            .zip(&v)
            .map(|(&a, &d)| a + T::of(radius * d))
            .collect(),
    );
    Perturbed { image, radius }
}
