use crate::prior::{AnalyticDenoiser, DiscreteDataset, PfgmConfig};
use crate::scalar::Real;
use crate::tomo::Image;

/// Image-space component of the Poisson field of a discrete dataset seen from
/// the augmented point `(x, r)`, `r = sigma sqrt(D)`:
/// `sum_k (x - y_k) (||x - y_k||^2 + r^2)^(-(N+D)/2)`.
///
/// The result is only defined up to a positive factor: the surface-area
/// constant is dropped and the kernel is rescaled so its largest term is one.
pub fn poisson_field<T: Real>(
    ds: &DiscreteDataset<T>,
    x: &Image<T>,
    sigma: f64,
    cfg: &PfgmConfig,
) -> Image<T> {
    let kernel = AnalyticDenoiser::new(ds.clone(), cfg);
    let logs = kernel.log_weights(x, sigma);
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut field = vec![0.0f64; x.values().len()];
    for (l, y) in logs.iter().zip(ds.images()) {
        let w = if max.is_finite() {
            (l - max).exp()
        } else {
            0.0
        };
        for ((f, &xv), &yv) in field.iter_mut().zip(x.values()).zip(y.values()) {
            *f += w * (xv.as_f64() - yv.as_f64());
        }
    }
    Image::from_raw(x.grid(), field.into_iter().map(T::of).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Denoiser;
    use crate::tomo::ImageGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> ImageGrid {
        ImageGrid::new(4, 1.0).unwrap()
    }

    #[test]
    fn single_point_field_points_away() {
        let y = Image::from_fn(grid(), |r, c| (r * c) as f64 * 0.1);
        let x = Image::from_fn(grid(), |r, c| (r + c) as f64 * 0.2);
        let ds = DiscreteDataset::new(vec![y.clone()]).unwrap();
        let e = poisson_field(&ds, &x, 0.3, &PfgmConfig::for_pixels(16));
        let dir = x.sub(&y);
        let (en, dn) = (e.norm(), dir.norm());
        for (a, b) in e.values().iter().zip(dir.values()) {
            assert!((a / en - b / dn).abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_pair_has_no_transverse_component() {
        // mirror through the plane orthogonal to e_0: y_b = y_a with coordinate 0 negated
        let ya = Image::from_fn(grid(), |r, c| {
            if r == 0 && c == 0 {
                0.7
            } else {
                0.1 * (r + c) as f64
            }
        });
        let mut yb = ya.clone();
        yb.values_mut()[0] = -0.7;
        let mut x = Image::from_fn(grid(), |r, c| 0.05 * (r * 3 + c) as f64);
        x.values_mut()[0] = 0.0;
        let ds = DiscreteDataset::new(vec![ya, yb]).unwrap();
        let e = poisson_field(&ds, &x, 0.5, &PfgmConfig::for_pixels(16));
        assert!(e.values()[0].abs() < 1e-12);
    }

    #[test]
    fn field_parallels_denoiser_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = PfgmConfig::for_pixels(16);
        let ys: Vec<Image<f64>> = (0..6)
            .map(|_| Image::from_fn(grid(), |_, _| rng.random_range(0.0..1.0)))
            .collect();
        let ds = DiscreteDataset::new(ys).unwrap();
        let f = AnalyticDenoiser::new(ds.clone(), &cfg);
        for _ in 0..20 {
            let x = Image::from_fn(grid(), |_, _| rng.random_range(-1.0..2.0));
            let sigma = rng.random_range(0.05..2.0);
            let e = poisson_field(&ds, &x, sigma, &cfg);
            let resid = x.sub(&f.denoise(&x, sigma).unwrap());
            let cos = e.dot(&resid) / (e.norm() * resid.norm());
            assert!(cos >= 1.0 - 1e-9, "{cos}");
        }
    }
}
