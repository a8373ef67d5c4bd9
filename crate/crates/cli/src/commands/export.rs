use std::fs;
use std::path::PathBuf;

use clap::Args;
use force_core::io::load_image;
use force_core::Image64;

use super::{check_writable, parse_list};
use crate::error::{usage, CliResult};
use crate::Common;

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Display window `low,high` mapped to black and white.
    #[arg(long, default_value = "0,1")]
    pub window: String,
    /// Window centre; with `--width`, replaces `--window`.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
}

/// Binary 8-bit PGM of `img` with values in `[lo, hi]` mapped onto 0..=255.
pub fn to_pgm(img: &Image64, lo: f64, hi: f64) -> Vec<u8> {
    let n = img.n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(
        img.values()
            .iter()
            .map(|&v| (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

pub fn cmd_export(a: ExportArgs) -> CliResult<()> {
    let (lo, hi) = match (a.level, a.width) {
        (Some(l), Some(w)) => (l - w / 2.0, l + w / 2.0),
        (None, None) => match parse_list::<f64>(&a.window, "window")?[..] {
            [lo, hi] => (lo, hi),
            _ => return Err(usage("--window needs low,high")),
        },
        _ => return Err(usage("--level and --width go together")),
    };
    if !(hi > lo) {
        return Err(usage(format!("empty display window [{lo}, {hi}]")));
    }
    let img: Image64 = load_image(&a.input, a.common.fov)?;
    check_writable(&a.out)?;
    fs::write(&a.out, to_pgm(&img, lo, hi))?;
    Ok(())
}
