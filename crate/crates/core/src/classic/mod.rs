//! Classical reconstruction and regularisation primitives.

mod cg;
mod fbp;
mod mar;
mod red;
mod sart;
mod tv;

pub use cg::{cg_solve, CgOutcome};
pub use fbp::{fbp, FilterKind, FilterSpec};
pub use mar::{li_mar, sinogram_substitute, tissue_prior, SegThresholds};
pub use red::{red_condition, RedConfig, RedPriorForm};
pub use sart::{os_sart, os_sart_with, OsSartConfig, OsSartPlan};
pub use tv::{rof_objective, total_variation, tv_denoise};
