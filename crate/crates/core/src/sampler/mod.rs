//! Reverse-time sampling with data-consistency conditioning.

mod condition;
mod force;
mod schedule;

pub use condition::{condition, Conditioner, ConditioningSpec};
pub use force::{
    force_reconstruct, force_reconstruct_traced, force_sample, force_step, init_sample,
    momentum_coeff, write_diagnostics_csv, SamplerState, StepDiagnostics,
};
pub use schedule::{make_schedule, InitNoise, SamplerConfig, Schedule};
