//! Ground-truth phantoms and the three acquisition degradations: photon
//! starvation noise, angular undersampling and metal corruption.

mod metal;
mod noise;
mod phantom;

pub use metal::{
    compute_trace, corrupt_metal_sinogram, insert_metal, CorruptionMode, MetalDisc, MetalMask,
    TraceMask, VOID_SENTINEL,
};
pub use noise::{apply_low_dose, subsample_indices, subsample_views, NoiseModel};
pub use phantom::{shepp_logan, Ellipse, EllipsePhantomSpec};
