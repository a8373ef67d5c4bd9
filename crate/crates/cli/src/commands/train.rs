use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use force_core::prior::{load_checkpoint, save_checkpoint, PfgmConfig};
use force_core::ToyNet64;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_writable, load_image_dir, parse_list};
use crate::error::{usage, CliResult};
use crate::Common;

/// Largest image side the fully-connected denoiser accepts.
pub const MAX_SIDE: usize = 16;

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory of `.timg` training images.
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from this checkpoint instead of a fresh network.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Per-step loss CSV (`step,loss`).
    #[arg(long)]
    pub loss_log: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    /// Hidden layer widths, comma separated.
    #[arg(long, default_value = "64")]
    pub hidden: String,
    /// Augmentation dimensionality D.
    #[arg(long, default_value_t = 128)]
    pub d: usize,
    #[arg(long, default_value_t = -1.2)]
    pub p_mean: f64,
    #[arg(long, default_value_t = 1.2)]
    pub p_std: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_data: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let images: Vec<_> = load_image_dir(&a.data, a.common.fov)?
        .into_iter()
        .map(|(_, im)| im)
        .collect();
    let n = images[0].n();
    if images.iter().any(|im| im.n() != n) {
        return Err(usage("training images must share one size"));
    }
    if n > MAX_SIDE {
        return Err(usage(format!(
            "the network denoiser handles at most {MAX_SIDE}x{MAX_SIDE} images, got {n}x{n}"
        )));
    }
    if a.steps == 0 || a.batch == 0 || !(a.lr > 0.0) {
        return Err(usage("--steps, --batch and --lr must be positive"));
    }
    let mut pf = PfgmConfig::for_pixels(n * n);
    pf.d = a.d;
    pf.p_mean = a.p_mean;
    pf.p_std = a.p_std;
    pf.sigma_data = a.sigma_data;
    pf.validate()?;
    let hidden: Vec<usize> = parse_list(&a.hidden, "hidden widths")?;
    let mut net = match &a.resume {
        Some(p) => {
            let net: ToyNet64 = load_checkpoint(p)?;
            if net.pixels() != n * n {
                return Err(usage(format!(
                    "checkpoint expects {} pixels, data has {}",
                    net.pixels(),
                    n * n
                )));
            }
            net
        }
        None => ToyNet64::new(n * n, &hidden, a.seed)?,
    };
    check_writable(&a.out)?;
    if let Some(p) = &a.loss_log {
        check_writable(p)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut losses = Vec::with_capacity(a.steps);
    for _ in 0..a.steps {
        let batch: Vec<_> = (0..a.batch)
            .map(|_| images.choose(&mut rng).expect("non-empty").clone())
            .collect();
        losses.push(net.train_step(&batch, &pf, &mut rng, a.lr)?);
    }
    save_checkpoint(&net, &a.out)?;
    if let Some(p) = &a.loss_log {
        let mut w = BufWriter::new(File::create(p)?);
        writeln!(w, "step,loss")?;
        for (i, l) in losses.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, l)?;
        }
        w.flush()?;
    }
    Ok(())
}
