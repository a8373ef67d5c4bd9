use std::str::FromStr;

use crate::error::{config, precondition, Error, Result};
use crate::prior::PfgmConfig;

/// Norm of the initial perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitNoise {
    /// `sigma_0 sqrt(D)`.
    #[default]
    Literal,
    /// `sigma_0 sqrt(N)`, the typical norm of a training perturbation.
    Gaussian,
}

impl FromStr for InitNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Ok(Self::Literal),
            "gaussian" | "gaussian-consistent" => Ok(Self::Gaussian),
            _ => Err(config(format!("unknown init noise mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Number of noise levels `T`.
    pub steps: usize,
    pub sigma_start: f64,
    pub lambda_tv: f64,
    pub tv_iters: usize,
    pub momentum: bool,
    pub init_noise: InitNoise,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(pf: &PfgmConfig) -> Self {
        Self {
            steps: 40,
            sigma_start: 0.4 * pf.sigma_max,
            lambda_tv: 0.0,
            tv_iters: 20,
            momentum: true,
            init_noise: InitNoise::Literal,
            seed: 0,
        }
    }

    pub fn validate(&self, pf: &PfgmConfig) -> Result<()> {
        pf.validate()?;
        if self.steps < 2 {
            return Err(precondition(format!(
                "need at least 2 steps, got {}",
                self.steps
            )));
        }
        if !(self.sigma_start > pf.sigma_min && self.sigma_start <= pf.sigma_max) {
            return Err(precondition(format!(
                "sigma_start {} outside ({}, {}]",
                self.sigma_start, pf.sigma_min, pf.sigma_max
            )));
        }
        if !(self.lambda_tv >= 0.0 && self.lambda_tv.is_finite()) {
            return Err(precondition(format!(
                "lambda_tv must be >= 0, got {}",
                self.lambda_tv
            )));
        }
        Ok(())
    }
}

/// Decreasing noise levels `sigma_0 > ... > sigma_{T-1}`, followed implicitly by 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    sigmas: Vec<f64>,
}

impl Schedule {
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// `(sigma_i, sigma_{i+1})` for every step, the last one ending at 0.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sigmas
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, self.sigmas.get(i + 1).copied().unwrap_or(0.0)))
    }
}

/// rho-spaced levels from `sigma_start` down to `sigma_min`.
pub fn make_schedule(cfg: &SamplerConfig, pf: &PfgmConfig) -> Result<Schedule> {
    cfg.validate(pf)?;
    let inv = 1.0 / pf.rho;
    let (a, b) = (cfg.sigma_start.powf(inv), pf.sigma_min.powf(inv));
    let last = cfg.steps - 1;
    let mut sigmas: Vec<f64> = (0..cfg.steps)
        .map(|i| (a + i as f64 / last as f64 * (b - a)).powf(pf.rho))
        .collect();
    sigmas[0] = cfg.sigma_start;
    sigmas[last] = pf.sigma_min;
    Ok(Schedule { sigmas })
}
