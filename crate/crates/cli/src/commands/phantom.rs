use std::fs;
use std::path::PathBuf;

use clap::Args;
use force_core::io::{save_image, save_metal_mask};
use force_core::sim::{insert_metal, EllipsePhantomSpec, MetalDisc};
use force_core::{Image64, ImageGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_writable, parse_list, sibling};
use crate::error::{usage, CliResult};
use crate::Common;

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[command(flatten)]
    pub common: Common,
    /// Image side in pixels.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    /// Output file, or output directory when `--count` > 1.
    #[arg(long)]
    pub out: PathBuf,
    /// Metal disc `x,y,radius[,intensity]` in normalised coordinates; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub metal: Vec<String>,
    /// Where to write the metal mask (default: `<out>.mask.timg`).
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    /// Random anatomical variation of the inner ellipses, 0 for the textbook phantom.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Number of phantoms; more than one writes `phantom_NNNN.timg` files into `--out`.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Default metal intensity, well above the bone range.
const METAL_INTENSITY: f64 = 3.0;

fn parse_disc(s: &str) -> CliResult<MetalDisc> {
    let v: Vec<f64> = parse_list(s, "metal disc")?;
    match v[..] {
        [x, y, r] => Ok(MetalDisc {
            center: (x, y),
            radius: r,
            intensity: METAL_INTENSITY,
        }),
        [x, y, r, i] => Ok(MetalDisc {
            center: (x, y),
            radius: r,
            intensity: i,
        }),
        _ => Err(usage(format!(
            "metal disc `{s}` needs x,y,radius[,intensity]"
        ))),
    }
}

pub fn cmd_phantom(a: PhantomArgs) -> CliResult<()> {
    if a.size < 8 {
        return Err(usage(format!("--size must be at least 8, got {}", a.size)));
    }
    if !(0.0..=1.0).contains(&a.jitter) {
        return Err(usage(format!(
            "--jitter must be in [0, 1], got {}",
            a.jitter
        )));
    }
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let discs = a
        .metal
        .iter()
        .map(|s| parse_disc(s))
        .collect::<CliResult<Vec<_>>>()?;
    if a.count > 1 && !discs.is_empty() {
        return Err(usage("--metal cannot be combined with --count > 1"));
    }
    let grid = ImageGrid::with_fov(a.size, a.common.fov)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let base = EllipsePhantomSpec::shepp_logan();
    let mut images: Vec<Image64> = (0..a.count)
        .map(|_| {
            if a.jitter > 0.0 {
                base.jittered(&mut rng, a.jitter)
            } else {
                base.clone()
            }
            .render(grid)
        })
        .collect();
    if a.count > 1 {
        if a.out.exists() && !a.out.is_dir() {
            return Err(usage(format!(
                "{} exists and is not a directory",
                a.out.display()
            )));
        }
        check_writable(&a.out)?;
        fs::create_dir_all(&a.out)?;
        for (i, img) in images.iter().enumerate() {
            save_image(img, a.out.join(format!("phantom_{i:04}.timg")))?;
        }
        return Ok(());
    }
    check_writable(&a.out)?;
    let img = images.pop().expect("count is 1");
    if discs.is_empty() {
        return Ok(save_image(&img, &a.out)?);
    }
    let (with_metal, mask) = insert_metal(&img, &discs)?;
    let mask_out = a.mask_out.unwrap_or_else(|| sibling(&a.out, ".mask.timg"));
    check_writable(&mask_out)?;
    save_image(&with_metal, &a.out)?;
    save_metal_mask(&mask, &mask_out)?;
    Ok(())
}
