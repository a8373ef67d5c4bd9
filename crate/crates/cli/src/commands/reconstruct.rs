use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use force_core::classic::{
    fbp, li_mar, os_sart, FilterKind, FilterSpec, OsSartConfig, RedConfig, RedPriorForm,
    SegThresholds,
};
use force_core::io::{load_sinogram, load_trace, save_image};
use force_core::prior::{
    load_checkpoint, AnalyticDenoiser, Denoiser, DiscreteDataset, KernelMode, PfgmConfig,
};
use force_core::sampler::{
    force_reconstruct, force_reconstruct_traced, write_diagnostics_csv, ConditioningSpec,
    InitNoise, SamplerConfig,
};
use force_core::sim::TraceMask;
use force_core::{Image64, ImageGrid, Sinogram64, ToyNet64};

use super::simulate::Task;
use super::{check_writable, load_image_dir, parse_list, sibling};
use crate::error::{usage, CliResult};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fbp,
    Ossart,
    Limar,
    Force,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Conditioning {
    /// Pick from the task: RED for low dose, OS-SART for sparse view, MAR for metal.
    Auto,
    None,
    Red,
    Ossart,
    Mar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kernel {
    Pfgm,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input sinogram.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Image side; inferred from the detector length when omitted.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Fbp)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Task::Lowdose)]
    pub task: Task,
    #[arg(long, value_enum, default_value_t = Conditioning::Auto)]
    pub conditioning: Conditioning,
    /// Metal trace for LI-MAR and MAR conditioning (default with `--task mar`: `<input>.trace.tsin`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// `ram-lak` or `hann`.
    #[arg(long, default_value = "ram-lak")]
    pub filter: String,

    /// Trained network checkpoint used as the denoiser.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Directory of images forming the analytic denoiser's dataset.
    #[arg(long)]
    pub analytic: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Kernel::Pfgm)]
    pub kernel: Kernel,

    /// Augmentation dimensionality D.
    #[arg(long, default_value_t = 128)]
    pub d: usize,
    #[arg(long, default_value_t = 0.002)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma_max: f64,
    /// First noise level (default: 0.4 * sigma_max).
    #[arg(long)]
    pub sigma_start: Option<f64>,
    #[arg(long, default_value_t = 7.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_data: f64,
    /// Number of noise levels T.
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_tv: f64,
    #[arg(long, default_value_t = 20)]
    pub tv_iters: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub momentum: bool,
    /// `literal` (sigma_0 sqrt D) or `gaussian` (sigma_0 sqrt N).
    #[arg(long, default_value = "literal")]
    pub init_noise: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub cg_tol: f64,
    #[arg(long, default_value_t = 30)]
    pub cg_iters: usize,
    /// Use the halved anchor term of the literal RED objective.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub red_literal: bool,
    #[arg(long, default_value_t = 8)]
    pub subsets: usize,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// OS-SART passes per conditioning call (or in total for `--method ossart`).
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    /// Tissue thresholds `air_soft,soft_bone,bone_metal`.
    #[arg(long, default_value = "0.1,0.6,2.0")]
    pub seg: String,

    /// Per-step sampler diagnostics CSV.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

fn infer_size(sino: &Sinogram64) -> usize {
    (sino.n_det() as f64 / std::f64::consts::SQRT_2).floor() as usize
}

fn conditioning(
    a: &ReconstructArgs,
    trace: Option<&TraceMask>,
    sart: OsSartConfig,
    seg: SegThresholds,
) -> CliResult<ConditioningSpec> {
    let red = RedConfig {
        eta: a.eta,
        cg_tol: a.cg_tol,
        cg_iters: a.cg_iters,
        form: if a.red_literal {
            RedPriorForm::Literal
        } else {
            RedPriorForm::Proximal
        },
    };
    let choice = match (a.conditioning, a.task) {
        (Conditioning::Auto, Task::Lowdose) => Conditioning::Red,
        (Conditioning::Auto, Task::Sparse) => Conditioning::Ossart,
        (Conditioning::Auto, Task::Mar) => Conditioning::Mar,
        (c, _) => c,
    };
    Ok(match choice {
        Conditioning::None => ConditioningSpec::None,
        Conditioning::Red => ConditioningSpec::Red(red),
        Conditioning::Ossart => ConditioningSpec::OsSart(sart),
        Conditioning::Mar => ConditioningSpec::Mar {
            trace: trace
                .cloned()
                .ok_or_else(|| usage("MAR conditioning needs --trace"))?,
            thresholds: seg,
        },
        Conditioning::Auto => unreachable!("resolved above"),
    })
}

enum Prior {
    Analytic(AnalyticDenoiser<f64>),
    Net(ToyNet64),
}

fn load_prior(a: &ReconstructArgs, grid: ImageGrid, pf: &PfgmConfig) -> CliResult<Prior> {
    match (&a.checkpoint, &a.analytic) {
        (Some(_), Some(_)) => Err(usage("give either --checkpoint or --analytic, not both")),
        (None, None) => Err(usage("--method force needs --checkpoint or --analytic")),
        (Some(p), None) => {
            let net: ToyNet64 = load_checkpoint(p)?;
            if net.pixels() != grid.len() {
                return Err(usage(format!(
                    "checkpoint expects {} pixels, grid has {}",
                    net.pixels(),
                    grid.len()
                )));
            }
            Ok(Prior::Net(net))
        }
        (None, Some(dir)) => {
            let images: Vec<Image64> = load_image_dir(dir, a.common.fov)?
                .into_iter()
                .map(|(_, im)| im)
                .collect();
            if images.iter().any(|im| im.n() != grid.n()) {
                return Err(usage(format!(
                    "analytic dataset images must be {0}x{0}",
                    grid.n()
                )));
            }
            let ds = DiscreteDataset::new(images)?;
            let mode = match a.kernel {
                Kernel::Pfgm => KernelMode::Pfgm,
                Kernel::Gaussian => KernelMode::Gaussian,
            };
            Ok(Prior::Analytic(
                AnalyticDenoiser::new(ds, pf).with_mode(mode),
            ))
        }
    }
}

pub fn cmd_reconstruct(a: ReconstructArgs) -> CliResult<()> {
    let sino: Sinogram64 = load_sinogram(&a.input)?;
    let n = a.size.unwrap_or_else(|| infer_size(&sino));
    let grid = ImageGrid::with_fov(n, a.common.fov)?;
    let filter = FilterSpec {
        kind: a.filter.parse::<FilterKind>()?,
        padding: None,
    };
    let default_trace = sibling(&a.input, ".trace.tsin");
    let trace_path = match &a.trace {
        Some(p) => Some(p.as_path()),
        None if a.task == Task::Mar && default_trace.exists() => Some(default_trace.as_path()),
        None => None,
    };
    let trace = match trace_path {
        Some(p) => {
            let t = load_trace(p)?;
            if t.n_views() != sino.n_views() || t.n_det() != sino.n_det() {
                return Err(usage("trace and sinogram shapes differ"));
            }
            Some(t)
        }
        None => None,
    };
    let sart = OsSartConfig {
        n_subsets: a.subsets,
        omega: a.omega,
        passes: a.passes,
        eps: 1e-8,
    };
    let seg = match parse_list::<f64>(&a.seg, "tissue thresholds")?[..] {
        [air_soft, soft_bone, bone_metal] => SegThresholds {
            air_soft,
            soft_bone,
            bone_metal,
        },
        _ => return Err(usage("--seg needs three thresholds")),
    };
    seg.validate()?;
    let warn_task = |m: &str, t: Task| {
        if a.task != t {
            eprintln!(
                "warning: --method {m} is meant for --task {t:?}, running it on {:?} data",
                a.task
            );
        }
    };
    check_writable(&a.out)?;
    if let Some(p) = &a.diagnostics {
        check_writable(p)?;
    }
    if a.method != Method::Force && a.diagnostics.is_some() {
        return Err(usage("--diagnostics only applies to --method force"));
    }

    let (image, diagnostics) = match a.method {
        Method::Fbp => (fbp(&sino, grid, &filter)?, None),
        Method::Ossart => {
            sart.validate(sino.n_views())?;
            (os_sart(&sino, grid, &Image64::zeros(grid), &sart)?, None)
        }
        Method::Limar => {
            warn_task("limar", Task::Mar);
            let t = trace
                .as_ref()
                .ok_or_else(|| usage("--method limar needs --trace"))?;
            (fbp(&li_mar(&sino, t)?, grid, &filter)?, None)
        }
        Method::Force => {
            let spec = conditioning(&a, trace.as_ref(), sart, seg)?;
            let mut pf = PfgmConfig::for_pixels(grid.len());
            pf.d = a.d;
            pf.sigma_min = a.sigma_min;
            pf.sigma_max = a.sigma_max;
            pf.rho = a.rho;
            pf.sigma_data = a.sigma_data;
            pf.validate()?;
            let mut cfg = SamplerConfig::new(&pf);
            cfg.steps = a.steps;
            if let Some(s) = a.sigma_start {
                cfg.sigma_start = s;
            }
            cfg.lambda_tv = a.lambda_tv;
            cfg.tv_iters = a.tv_iters;
            cfg.momentum = a.momentum;
            cfg.init_noise = a.init_noise.parse::<InitNoise>()?;
            cfg.seed = a.seed;
            cfg.validate(&pf)?;
            spec.validate(sino.n_views())?;
            let prior = load_prior(&a, grid, &pf)?;
            let net_denoiser;
            let f: &dyn Denoiser<f64> = match &prior {
                Prior::Analytic(d) => d,
                Prior::Net(net) => {
                    net_denoiser = net.denoiser(pf.sigma_data);
                    &net_denoiser
                }
            };
            if a.diagnostics.is_some() {
                let (x, log) = force_reconstruct_traced(&sino, &spec, f, &cfg, &pf, grid)?;
                (x, Some(log))
            } else {
                (force_reconstruct(&sino, &spec, f, &cfg, &pf, grid)?, None)
            }
        }
    };
    save_image(&image, &a.out)?;
    if let (Some(p), Some(log)) = (&a.diagnostics, diagnostics) {
        write_diagnostics_csv(&log, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}
