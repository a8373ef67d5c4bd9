use crate::error::{precondition, Result};

/// Hyper-parameters shared by training and sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfgmConfig {
    /// Augmentation dimensionality `D`.
    pub d: usize,
    /// Data dimensionality `N` (pixels per image).
    pub n: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Schedule exponent.
    pub rho: f64,
    /// Mean of `ln sigma` during training.
    pub p_mean: f64,
    /// Standard deviation of `ln sigma` during training.
    pub p_std: f64,
    /// Data scale used by the preconditioning.
    pub sigma_data: f64,
}

impl PfgmConfig {
    /// Defaults for images of `n` pixels with attenuation roughly in `[0, 1]`.
    pub fn for_pixels(n: usize) -> Self {
        Self {
            d: 128,
            n,
            sigma_min: 0.002,
            sigma_max: 2.0,
            rho: 7.0,
            p_mean: -1.2,
            p_std: 1.2,
            sigma_data: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(precondition("D and N must be at least 1"));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min < self.sigma_max && self.sigma_max.is_finite())
        {
            return Err(precondition(format!(
                "need 0 < sigma_min < sigma_max, got {} and {}",
                self.sigma_min, self.sigma_max
            )));
        }
        if !(self.rho >= 1.0) {
            return Err(precondition(format!("rho must be >= 1, got {}", self.rho)));
        }
        if !(self.sigma_data > 0.0) || !(self.p_std >= 0.0) || !self.p_mean.is_finite() {
            return Err(precondition(
                "sigma_data must be positive and p_std non-negative",
            ));
        }
        Ok(())
    }

    pub fn scalings(&self, sigma: f64) -> EdmScalings {
        EdmScalings::new(sigma, self.sigma_data)
    }
}

/// EDM preconditioning coefficients at one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdmScalings {
    pub c_skip: f64,
    pub c_out: f64,
    pub c_in: f64,
    pub c_noise: f64,
}

impl EdmScalings {
    pub fn new(sigma: f64, sigma_data: f64) -> Self {
        let s2 = sigma * sigma + sigma_data * sigma_data;
        Self {
            c_skip: sigma_data * sigma_data / s2,
            c_out: sigma * sigma_data / s2.sqrt(),
            c_in: 1.0 / s2.sqrt(),
            c_noise: sigma.ln() / 4.0,
        }
    }

    /// Loss weight `1 / c_out^2`.
    pub fn loss_weight(&self) -> f64 {
        1.0 / (self.c_out * self.c_out)
    }
}
