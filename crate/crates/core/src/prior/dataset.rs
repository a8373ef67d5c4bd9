use crate::error::{precondition, shape, Result};
use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid};

/// Empirical data distribution: a non-empty set of images on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDataset<T> {
    images: Vec<Image<T>>,
}

impl<T: Real> DiscreteDataset<T> {
    pub fn new(images: Vec<Image<T>>) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| precondition("dataset is empty"))?;
        let n = first.n();
        if let Some(bad) = images.iter().position(|im| im.n() != n) {
            return Err(shape(format!("dataset image {bad} is not {n}x{n}")));
        }
        Ok(Self { images })
    }

    pub fn images(&self) -> &[Image<T>] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn grid(&self) -> ImageGrid {
        self.images[0].grid()
    }

    /// Pixels per image.
    pub fn dim(&self) -> usize {
        self.images[0].values().len()
    }
}
