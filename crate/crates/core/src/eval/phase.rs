use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{precondition, shape, Result};
use crate::scalar::Real;
use crate::tomo::Image;

/// Side of the square patches used as features.
pub const PATCH: usize = 4;

const EIG_FLOOR: f64 = 1e-10;

/// Mean and covariance of the flattened `PATCH x PATCH` patches of a set of images.
#[derive(Debug, Clone)]
pub struct PatchMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

fn patches(values: &[f64], n: usize, out: &mut Vec<DVector<f64>>) {
    let blocks = n / PATCH;
    for br in 0..blocks {
        for bc in 0..blocks {
            out.push(DVector::from_fn(PATCH * PATCH, |k, _| {
                values[(br * PATCH + k / PATCH) * n + bc * PATCH + k % PATCH]
            }));
        }
    }
}

/// Moments of patch features gathered from raw pixel arrays of side `n`.
pub fn patch_moments(images: &[Vec<f64>], n: usize) -> Result<PatchMoments> {
    let mut feats = Vec::new();
    for img in images {
        patches(img, n, &mut feats);
    }
    if feats.len() < 2 {
        return Err(precondition("need at least two patches for a covariance"));
    }
    let dim = PATCH * PATCH;
    let count = feats.len() as f64;
    let mean = feats.iter().fold(DVector::zeros(dim), |acc, f| acc + f) / count;
    let mut cov = DMatrix::zeros(dim, dim);
    for f in &feats {
        let d = f - &mean;
        cov += &d * d.transpose();
    }
    Ok(PatchMoments {
        mean,
        cov: cov / (count - 1.0),
    })
}

fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(EIG_FLOOR).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// `||mu_a - mu_b||^2 + tr(C_a + C_b - 2 (C_a^1/2 C_b C_a^1/2)^1/2)`, clamped at 0.
pub fn frechet_distance(a: &PatchMoments, b: &PatchMoments) -> f64 {
    let mean_term = (&a.mean - &b.mean).norm_squared();
    let sa = sym_sqrt(&a.cov);
    let cross = sym_sqrt(&(&sa * &b.cov * &sa));
    (mean_term + a.cov.trace() + b.cov.trace() - 2.0 * cross.trace()).max(0.0)
}

/// Distance between the two sets at each noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub sigmas: Vec<f64>,
    pub distances: Vec<f64>,
}

/// Adds `sigma * eps` to every image of both sets and measures the Fréchet
/// distance between their patch moments.
///
/// The i-th image of each set receives the same noise draw, which removes
/// most of the Monte-Carlo spread from the comparison. Added noise shrinks
/// covariance differences but leaves the gap between the patch means as is,
/// so only mean-preserving degradations fade to zero distance.
pub fn phase_scan<T: Real, R: Rng + ?Sized>(
    corrupted: &[Image<T>],
    clean: &[Image<T>],
    sigmas: &[f64],
    rng: &mut R,
) -> Result<PhaseScan> {
    if corrupted.is_empty() || clean.is_empty() {
        return Err(precondition("phase scan needs two non-empty sets"));
    }
    let grid = corrupted[0].grid();
    if corrupted.iter().chain(clean).any(|im| im.grid() != grid) {
        return Err(shape("phase scan images must share one grid"));
    }
    if grid.n() < PATCH {
        return Err(precondition(format!(
            "images smaller than the {PATCH}x{PATCH} patch"
        )));
    }
    if sigmas.is_empty()
        || sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
        || sigmas.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(precondition(
            "sigma grid must be non-negative and strictly increasing",
        ));
    }
    let n = grid.n();
    let to_f64 = |im: &Image<T>| im.values().iter().map(|v| v.as_f64()).collect::<Vec<f64>>();
    let a: Vec<Vec<f64>> = corrupted.iter().map(to_f64).collect();
    let b: Vec<Vec<f64>> = clean.iter().map(to_f64).collect();
    let mut distances = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let eps: Vec<Vec<f64>> = (0..a.len().max(b.len()))
            .map(|_| {
                (0..grid.len())
                    .map(|_| StandardNormal.sample(rng))
                    .collect()
            })
            .collect();
        let noisy = |set: &[Vec<f64>]| -> Vec<Vec<f64>> {
            set.iter()
                .zip(&eps)
                .map(|(im, e)| im.iter().zip(e).map(|(v, z)| v + sigma * z).collect())
                .collect()
        };
        let ma = patch_moments(&noisy(&a), n)?;
        let mb = patch_moments(&noisy(&b), n)?;
        distances.push(frechet_distance(&ma, &mb));
    }
    Ok(PhaseScan {
        sigmas: sigmas.to_vec(),
        distances,
    })
}
