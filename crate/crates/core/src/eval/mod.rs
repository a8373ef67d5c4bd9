//! Image-quality metrics and the noise-level scan used to pick a start time.

mod metrics;
mod phase;

pub use metrics::{psnr, rmse, ssim, MetricReport, SsimParams};
pub use phase::{frechet_distance, patch_moments, phase_scan, PatchMoments, PhaseScan, PATCH};
