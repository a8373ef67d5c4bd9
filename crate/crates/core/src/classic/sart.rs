use crate::error::{precondition, Result};
use crate::scalar::Real;
use crate::tomo::{Image, ImageGrid, Projector, Sinogram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsSartConfig {
    pub n_subsets: usize,
    /// Relaxation, in `(0, 2)`.
    pub omega: f64,
    pub passes: usize,
    /// Floor below which row/column sums are treated as empty.
    pub eps: f64,
}

impl Default for OsSartConfig {
    fn default() -> Self {
        Self {
            n_subsets: 8,
            omega: 1.0,
            passes: 1,
            eps: 1e-8,
        }
    }
}

impl OsSartConfig {
    pub fn validate(&self, n_views: usize) -> Result<()> {
        if self.n_subsets == 0 || self.n_subsets > n_views {
            return Err(precondition(format!(
                "need 1 <= n_subsets <= {n_views}, got {}",
                self.n_subsets
            )));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(precondition(format!(
                "relaxation must lie in (0, 2), got {}",
                self.omega
            )));
        }
        if !(self.eps > 0.0) {
            return Err(precondition("eps must be positive"));
        }
        Ok(())
    }
}

struct Subset<T> {
    views: Vec<usize>,
    inv_rows: Vec<T>,
    inv_cols: Vec<T>,
}

/// Precomputed interleaved subsets with their row/column normalisers, reusable
/// across calls on the same projector.
pub struct OsSartPlan<'p, T> {
    proj: &'p Projector<T>,
    cfg: OsSartConfig,
    subsets: Vec<Subset<T>>,
}

impl<'p, T: Real> OsSartPlan<'p, T> {
    pub fn new(proj: &'p Projector<T>, cfg: OsSartConfig) -> Result<Self> {
        let n_views = proj.geometry().n_views();
        cfg.validate(n_views)?;
        let eps = T::of(cfg.eps);
        let inv = |v: T| if v > eps { T::one() / v } else { T::zero() };
        let subsets = (0..cfg.n_subsets)
            .map(|s| {
                let views: Vec<usize> = (s..n_views).step_by(cfg.n_subsets).collect();
                let inv_rows = proj.row_sums(&views).into_iter().map(inv).collect();
                let inv_cols = proj.column_sums(&views).into_iter().map(inv).collect();
                Subset {
                    views,
                    inv_rows,
                    inv_cols,
                }
            })
            .collect();
        Ok(Self { proj, cfg, subsets })
    }

    pub fn config(&self) -> &OsSartConfig {
        &self.cfg
    }

    /// Runs `passes` sweeps over all subsets starting from `x0`.
    pub fn run(&self, sino: &Sinogram<T>, x0: &Image<T>) -> Result<Image<T>> {
        self.proj.check_sinogram(sino)?;
        x0.check_grid(self.proj.grid())?;
        let nd = sino.n_det();
        let omega = T::of(self.cfg.omega);
        let mut x = x0.clone();
        let mut fwd = Vec::new();
        let mut upd = vec![T::zero(); x.values().len()];
        for _ in 0..self.cfg.passes {
            for sub in &self.subsets {
                fwd.resize(sub.views.len() * nd, T::zero());
                self.proj.forward_views(x.values(), &sub.views, &mut fwd);
                for (i, (f, &w)) in fwd.iter_mut().zip(&sub.inv_rows).enumerate() {
                    let (v, k) = (sub.views[i / nd], i % nd);
                    *f = (sino.get(v, k) - *f) * w;
                }
                upd.iter_mut().for_each(|u| *u = T::zero());
                self.proj.back_views(&fwd, &sub.views, &mut upd);
                for ((xv, &u), &c) in x.values_mut().iter_mut().zip(&upd).zip(&sub.inv_cols) {
                    *xv += omega * u * c;
                }
            }
        }
        Ok(x)
    }
}

/// Ordered-subsets SART from `x0`.
pub fn os_sart<T: Real>(
    sino: &Sinogram<T>,
    grid: ImageGrid,
    x0: &Image<T>,
    cfg: &OsSartConfig,
) -> Result<Image<T>> {
    let proj = Projector::new(grid, sino.geometry().clone())?;
    os_sart_with(&proj, sino, x0, cfg)
}

pub fn os_sart_with<T: Real>(
    proj: &Projector<T>,
    sino: &Sinogram<T>,
    x0: &Image<T>,
    cfg: &OsSartConfig,
) -> Result<Image<T>> {
    OsSartPlan::new(proj, *cfg)?.run(sino, x0)
}
