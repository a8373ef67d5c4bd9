//! Batch front end: phantom generation, degradation, prior training,
//! reconstruction, evaluation and PGM export.
//!
//! Every option takes a value so that a `key = value` config file (see
//! [`config`]) maps one-to-one onto flags.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "force",
    version,
    about = "CT reconstruction with a Poisson-flow prior"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Shepp-Logan phantom (optionally jittered, optionally with metal).
    Phantom(commands::phantom::PhantomArgs),
    /// Project an image and apply a low-dose, sparse-view or metal degradation.
    Simulate(commands::simulate::SimulateArgs),
    /// Train the small network denoiser on a directory of images.
    Train(commands::train::TrainArgs),
    /// Reconstruct an image from a sinogram.
    Reconstruct(commands::reconstruct::ReconstructArgs),
    /// Compare images with a reference, or scan noise levels between two sets.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Convert an image to an 8-bit PGM through a display window.
    Export(commands::export::ExportArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Width of the square field of view, used to place pixels in space.
    #[arg(long, default_value_t = 20.0)]
    pub fov: f64,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::Phantom(a) => &a.common,
            Self::Simulate(a) => &a.common,
            Self::Train(a) => &a.common,
            Self::Reconstruct(a) => &a.common,
            Self::Evaluate(a) => &a.common,
            Self::Export(a) => &a.common,
        }
    }

    fn execute(self) -> CliResult<()> {
        match self {
            Self::Phantom(a) => commands::phantom::cmd_phantom(a),
            Self::Simulate(a) => commands::simulate::cmd_simulate(a),
            Self::Train(a) => commands::train::cmd_train(a),
            Self::Reconstruct(a) => commands::reconstruct::cmd_reconstruct(a),
            Self::Evaluate(a) => commands::evaluate::cmd_evaluate(a),
            Self::Export(a) => commands::export::cmd_export(a),
        }
    }
}

/// Parses `argv` (program name first), expands `--config` and runs the command.
pub fn run(argv: Vec<String>) -> CliResult<()> {
    let argv = config::expand_config(argv)?;
    let cli = <Cli as clap::CommandFactory>::command()
        .args_override_self(true)
        .try_get_matches_from(argv)
        .and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m))
        .map_err(CliError::Clap)?;
    let common = cli.command.common().clone();
    if !(common.fov > 0.0 && common.fov.is_finite()) {
        return Err(error::usage(format!(
            "--fov must be positive, got {}",
            common.fov
        )));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(error::usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| error::usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| cli.command.execute())
}
