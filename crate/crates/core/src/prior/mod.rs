//! The PFGM++ prior: perturbation kernel, EDM-preconditioned denoisers and
//! their training, plus exact oracles on discrete datasets.

mod analytic;
mod checkpoint;
mod config;
mod dataset;
mod denoiser;
mod field;
mod perturb;
mod toynet;

pub use analytic::{AnalyticDenoiser, KernelMode};
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use config::{EdmScalings, PfgmConfig};
pub use dataset::DiscreteDataset;
pub use denoiser::{score, Denoiser, IdentityDenoiser};
pub use field::poisson_field;
pub use perturb::{
    perturb, radius_from_beta, sample_radius, sample_sigma, unit_direction, Perturbed,
};
pub use toynet::{precondition, NetDenoiser, ToyNet, TrainingSample};
