use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use force_core::eval::{phase_scan, MetricReport};
use force_core::io::load_image;
use force_core::Image64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_writable, load_image_dir, parse_list};
use crate::error::{usage, CliResult};
use crate::Common;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Images to score against `--reference`.
    pub images: Vec<PathBuf>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Dynamic range used by PSNR and SSIM.
    #[arg(long, default_value_t = 1.0)]
    pub range: f64,
    /// CSV destination (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scan noise levels between `--corrupted` and `--clean` instead of scoring images.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub phase_scan: bool,
    /// Directory of degraded images for the phase scan.
    #[arg(long)]
    pub corrupted: Option<PathBuf>,
    /// Directory of clean images for the phase scan.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Increasing noise levels for the phase scan.
    #[arg(long, default_value = "0,0.01,0.02,0.05,0.1,0.2,0.5,1,2")]
    pub sigmas: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    if let Some(p) = &a.out {
        check_writable(p)?;
    }
    let fov = a.common.fov;
    if a.phase_scan {
        let (Some(c), Some(k)) = (&a.corrupted, &a.clean) else {
            return Err(usage(
                "--phase-scan needs --corrupted and --clean directories",
            ));
        };
        let sigmas: Vec<f64> = parse_list(&a.sigmas, "sigma grid")?;
        let corrupted: Vec<Image64> = load_image_dir(c, fov)?
            .into_iter()
            .map(|(_, im)| im)
            .collect();
        let clean: Vec<Image64> = load_image_dir(k, fov)?
            .into_iter()
            .map(|(_, im)| im)
            .collect();
        let scan = phase_scan(
            &corrupted,
            &clean,
            &sigmas,
            &mut ChaCha8Rng::seed_from_u64(a.seed),
        )?;
        let mut w = sink(&a.out)?;
        writeln!(w, "sigma,distance")?;
        for (s, d) in scan.sigmas.iter().zip(&scan.distances) {
            writeln!(w, "{s},{d:.9e}")?;
        }
        w.flush()?;
        return Ok(());
    }
    let reference = a
        .reference
        .as_ref()
        .ok_or_else(|| usage("--reference is required"))?;
    if a.images.is_empty() {
        return Err(usage("no images to evaluate"));
    }
    if !(a.range > 0.0) {
        return Err(usage(format!("--range must be positive, got {}", a.range)));
    }
    let reference: Image64 = load_image(reference, fov)?;
    let mut rows = Vec::with_capacity(a.images.len());
    for p in &a.images {
        let img: Image64 = load_image(p, fov)?;
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        rows.push((name, MetricReport::compute(&img, &reference, a.range)?));
    }
    let mut w = sink(&a.out)?;
    writeln!(w, "name,psnr_db,ssim,rmse")?;
    for (name, r) in rows {
        writeln!(
            w,
            "{name},{},{:.6},{:.6e}",
            fmt_psnr(r.psnr_db),
            r.ssim,
            r.rmse
        )?;
    }
    w.flush()?;
    Ok(())
}
