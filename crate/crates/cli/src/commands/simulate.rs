use std::path::PathBuf;

use clap::{Args, ValueEnum};
use force_core::io::{load_image, load_metal_mask, save_sinogram, save_trace};
use force_core::sim::{
    apply_low_dose, compute_trace, corrupt_metal_sinogram, subsample_views, CorruptionMode,
    NoiseModel,
};
use force_core::{Image64, Projector64, ScanGeometry};

use super::{check_writable, sibling};
use crate::error::{usage, CliResult};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Lowdose,
    Sparse,
    Mar,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Task::Lowdose)]
    pub task: Task,
    /// Views of the full acquisition over [0, pi).
    #[arg(long, default_value_t = 360)]
    pub full_views: usize,
    /// Views kept by the sparse-view task.
    #[arg(long, default_value_t = 96)]
    pub views: usize,
    /// Fraction of the full-dose photon count (low-dose task).
    #[arg(long, default_value_t = 0.25)]
    pub dose: f64,
    /// Incident photons per ray at full dose.
    #[arg(long, default_value_t = 1e4)]
    pub i0: f64,
    /// Metal mask for the MAR task (default: `<input>.mask.timg`).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Detector bins added around the metal trace.
    #[arg(long, default_value_t = 1)]
    pub trace_margin: usize,
    /// `void`, `saturate` or `saturate:<i0>`.
    #[arg(long, default_value = "void")]
    pub corruption: String,
    /// Where to write the metal trace (default: `<out>.trace.tsin`).
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let img: Image64 = load_image(&a.input, a.common.fov)?;
    if a.full_views == 0 {
        return Err(usage("--full-views must be positive"));
    }
    check_writable(&a.out)?;
    let grid = img.grid();
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, a.full_views)?)?;
    match a.task {
        Task::Lowdose => {
            let nm = NoiseModel {
                i0: a.i0,
                dose_fraction: a.dose,
                seed: a.seed,
            };
            nm.validate()?;
            let sino = apply_low_dose(&proj.forward(&img)?, &nm)?;
            save_sinogram(&sino, &a.out)?;
        }
        Task::Sparse => {
            if a.views == 0 || a.views > a.full_views {
                return Err(usage(format!(
                    "--views must be in 1..={}, got {}",
                    a.full_views, a.views
                )));
            }
            let sino = subsample_views(&proj.forward(&img)?, a.views)?;
            save_sinogram(&sino, &a.out)?;
        }
        Task::Mar => {
            let mode: CorruptionMode = a.corruption.parse()?;
            let mask_path = a
                .mask
                .clone()
                .unwrap_or_else(|| sibling(&a.input, ".mask.timg"));
            let mask = load_metal_mask(&mask_path, a.common.fov).map_err(|e| {
                usage(format!(
                    "MAR task needs a metal mask ({}): {e}",
                    mask_path.display()
                ))
            })?;
            if mask.grid().n() != grid.n() {
                return Err(usage("metal mask and image sizes differ"));
            }
            let trace_out = a
                .trace_out
                .clone()
                .unwrap_or_else(|| sibling(&a.out, ".trace.tsin"));
            check_writable(&trace_out)?;
            let trace = compute_trace(&mask, proj.geometry(), a.trace_margin)?;
            let sino = corrupt_metal_sinogram(&proj.forward(&img)?, &trace, mode)?;
            save_sinogram(&sino, &a.out)?;
            save_trace(&trace, proj.geometry(), &trace_out)?;
        }
    }
    Ok(())
}
