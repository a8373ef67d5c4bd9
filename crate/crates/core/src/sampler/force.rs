use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classic::{fbp, li_mar, total_variation, tv_denoise, FilterSpec};
use crate::error::{shape, Error, Result};
use crate::prior::{unit_direction, Denoiser, PfgmConfig};
use crate::sampler::{
    make_schedule, Conditioner, ConditioningSpec, InitNoise, SamplerConfig, Schedule,
};
use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid, Projector, Sinogram};

/// Sampler state carried between steps.
#[derive(Debug, Clone)]
pub struct SamplerState<T> {
    pub x: Image<T>,
    /// Previous denoised estimate; `None` before the first step.
    pub x_hat_prev: Option<Image<T>>,
    pub xi: f64,
}

impl<T: Real> SamplerState<T> {
    pub fn new(x: Image<T>) -> Self {
        Self {
            x,
            x_hat_prev: None,
            xi: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub sigma: f64,
    /// `||H x_hat - p||`.
    pub data_residual: f64,
    pub tv_value: f64,
}

/// Nesterov update: returns `(xi, (xi_prev - 1) / xi)`.
pub fn momentum_coeff(xi_prev: f64) -> (f64, f64) {
    let xi = (1.0 + (1.0 + 4.0 * xi_prev * xi_prev).sqrt()) / 2.0;
    (xi, (xi_prev - 1.0) / xi)
}

/// `x_init` plus a uniformly oriented perturbation of norm `sigma_0 sqrt(D)` or `sigma_0 sqrt(N)`.
pub fn init_sample<T: Real, R: Rng + ?Sized>(
    x_init: &Image<T>,
    schedule: &Schedule,
    cfg: &SamplerConfig,
    pf: &PfgmConfig,
    rng: &mut R,
) -> Image<T> {
    let dim = match cfg.init_noise {
        InitNoise::Literal => pf.d,
        InitNoise::Gaussian => x_init.values().len(),
    };
    let radius = schedule.sigmas()[0] * (dim as f64).sqrt();
    let v = unit_direction(x_init.values().len(), rng);
    Image::from_raw(
        x_init.grid(),
        x_init
            .values()
            .iter()
            .zip(&v)
            .map(|(&a, &d)| a + T::of(radius * d))
            .collect(),
    )
}

/// One conditioned, TV-regularised Euler step from `sigma` to `sigma_next`.
#[allow(clippy::too_many_arguments)]
pub fn force_step<T: Real, D: Denoiser<T> + ?Sized>(
    state: SamplerState<T>,
    sigma: f64,
    sigma_next: f64,
    sino: &Sinogram<T>,
    cond: &Conditioner<'_, T>,
    f: &D,
    cfg: &SamplerConfig,
    step: usize,
) -> Result<(SamplerState<T>, Image<T>)> {
    if !(sigma > sigma_next && sigma_next >= 0.0) {
        return Err(crate::error::precondition(format!(
            "step {step}: need sigma_i > sigma_next >= 0, got {sigma} and {sigma_next}"
        )));
    }
    let (xi, coeff) = momentum_coeff(state.xi);
    let x_bar = cond.apply(&state.x, sino)?;
    let mut x_hat = tv_denoise(
        &f.denoise(&x_bar, sigma)?,
        T::of(cfg.lambda_tv),
        cfg.tv_iters,
    );
    if cfg.momentum {
        if let Some(prev) = &state.x_hat_prev {
            let delta = x_hat.sub(prev);
            x_hat.axpy(T::of(coeff), &delta);
        }
    }
    let h = T::of((sigma_next - sigma) / sigma);
    let x_next = state.x.zip_map(&x_hat, |x, xh| x + h * (x - xh));
    if !x_next.is_finite() {
        return Err(Error::Numerical {
            step,
            what: "sampler state became non-finite".into(),
        });
    }
    let next = SamplerState {
        x: x_next,
        x_hat_prev: Some(x_hat.clone()),
        xi,
    };
    Ok((next, x_hat))
}

fn initial_estimate<T: Real>(
    sino: &Sinogram<T>,
    spec: &ConditioningSpec,
    grid: ImageGrid,
) -> Result<Image<T>> {
    let filter = FilterSpec::ram_lak();
    match spec {
        ConditioningSpec::Mar { trace, .. } => fbp(&li_mar(sino, trace)?, grid, &filter),
        _ => fbp(sino, grid, &filter),
    }
}

/// Runs the full schedule from `x_init`, optionally logging each step.
pub fn force_sample<T: Real, D: Denoiser<T> + ?Sized>(
    x_init: &Image<T>,
    sino: &Sinogram<T>,
    cond: &Conditioner<'_, T>,
    f: &D,
    cfg: &SamplerConfig,
    pf: &PfgmConfig,
    mut trace: Option<&mut Vec<StepDiagnostics>>,
) -> Result<Image<T>> {
    if x_init.values().len() != pf.n {
        return Err(shape(format!(
            "image has {} pixels but N = {}",
            x_init.values().len(),
            pf.n
        )));
    }
    let schedule = make_schedule(cfg, pf)?;
    let proj = cond.projector();
    proj.check_sinogram(sino)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = SamplerState::new(init_sample(x_init, &schedule, cfg, pf, &mut rng));
    for (step, (sigma, sigma_next)) in schedule.steps().enumerate() {
        let (next, x_hat) = force_step(state, sigma, sigma_next, sino, cond, f, cfg, step)?;
        if let Some(log) = trace.as_deref_mut() {
            log.push(StepDiagnostics {
                step,
                sigma,
                data_residual: proj.forward(&x_hat)?.sub(sino).norm().as_f64(),
                tv_value: total_variation(&x_hat).as_f64(),
            });
        }
        state = next;
    }
    Ok(state.x)
}

fn run<T: Real, D: Denoiser<T> + ?Sized>(
    sino: &Sinogram<T>,
    spec: &ConditioningSpec,
    f: &D,
    cfg: &SamplerConfig,
    pf: &PfgmConfig,
    grid: ImageGrid,
    trace: Option<&mut Vec<StepDiagnostics>>,
) -> Result<Image<T>> {
    if grid.len() != pf.n {
        return Err(shape(format!(
            "grid has {} pixels but N = {}",
            grid.len(),
            pf.n
        )));
    }
    cfg.validate(pf)?;
    let proj = Projector::new(grid, sino.geometry().clone())?;
    proj.check_sinogram(sino)?;
    let cond = Conditioner::new(&proj, spec)?;
    let x_init = initial_estimate(sino, spec, grid)?;
    force_sample(&x_init, sino, &cond, f, cfg, pf, trace)
}

/// Full reconstruction: initial estimate, noisy start, `T` steps down to zero noise.
pub fn force_reconstruct<T: Real, D: Denoiser<T> + ?Sized>(
    sino: &Sinogram<T>,
    spec: &ConditioningSpec,
    f: &D,
    cfg: &SamplerConfig,
    pf: &PfgmConfig,
    grid: ImageGrid,
) -> Result<Image<T>> {
    run(sino, spec, f, cfg, pf, grid, None)
}

/// As [`force_reconstruct`], also returning per-step diagnostics.
pub fn force_reconstruct_traced<T: Real, D: Denoiser<T> + ?Sized>(
    sino: &Sinogram<T>,
    spec: &ConditioningSpec,
    f: &D,
    cfg: &SamplerConfig,
    pf: &PfgmConfig,
    grid: ImageGrid,
) -> Result<(Image<T>, Vec<StepDiagnostics>)> {
    let mut log = Vec::with_capacity(cfg.steps);
    let x = run(sino, spec, f, cfg, pf, grid, Some(&mut log))?;
    Ok((x, log))
}

pub fn write_diagnostics_csv<W: Write>(rows: &[StepDiagnostics], mut w: W) -> Result<()> {
    writeln!(w, "step,sigma,data_residual,tv_value")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.step, r.sigma, r.data_residual, r.tv_value
        )?;
    }
    Ok(())
}
