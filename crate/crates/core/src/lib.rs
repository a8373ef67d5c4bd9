//! Tomographic reconstruction with a Poisson-flow generative prior.
//!
//! The crate is organised bottom-up:
//!
//! + [`tomo`]: image grids, parallel-beam geometry and the Joseph projector pair
//! + [`sim`]: phantoms and the low-dose, sparse-view and metal degradations
//! + [`classic`]: FBP, OS-SART, conjugate gradients, TV denoising and sinogram MAR
//! + [`prior`]: PFGM++ perturbation kernel, EDM-preconditioned denoisers and training
//! + [`sampler`]: the conditioned reverse-flow sampling loop
//! + [`eval`]: image quality metrics and the noise-level phase scan
//! + [`io`]: binary image / sinogram containers
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classic;
pub mod error;
pub mod eval;
pub mod io;
pub mod prior;
pub mod sampler;
pub mod scalar;
pub mod sim;
pub mod tomo;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tomo::{Image, ImageGrid, Projector, ScanGeometry, Sinogram};

/// Double-precision image, the default working type.
pub type Image64 = Image<f64>;
/// Single-precision image.
pub type Image32 = Image<f32>;
/// Double-precision sinogram.
pub type Sinogram64 = Sinogram<f64>;
/// Single-precision sinogram.
pub type Sinogram32 = Sinogram<f32>;
/// Double-precision projector.
pub type Projector64 = Projector<f64>;
/// Double-precision trainable denoiser.
pub type ToyNet64 = prior::ToyNet<f64>;
