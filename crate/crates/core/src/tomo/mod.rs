//! Grids, parallel-beam geometry and the discrete projector pair.

mod geometry;
mod image;
mod projector;

pub use geometry::{ScanGeometry, Sinogram};
pub use image::{Image, ImageGrid};
pub use projector::{back_project, forward_project, Projector};
