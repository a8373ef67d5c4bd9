use crate::classic::cg::{cg_solve, CgOutcome};
use crate::error::{precondition, Result};
use crate::scalar::Real;
use crate::tomo::{Image, Projector, Sinogram};

/// Which quadratic anchors the data-consistency solve to the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RedPriorForm {
    /// `eta/2 ||x - x_i||^2`: normal equations `(H^T H + eta I) x = H^T p + eta x_i`.
    #[default]
    Proximal,
    /// `eta/2 x^T (x - x_i)` taken as written: `(H^T H + eta I) x = H^T p + (eta/2) x_i`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedConfig {
    pub eta: f64,
    pub cg_tol: f64,
    pub cg_iters: usize,
    pub form: RedPriorForm,
}

impl Default for RedConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            cg_tol: 1e-6,
            cg_iters: 30,
            form: RedPriorForm::Proximal,
        }
    }
}

impl RedConfig {
    pub fn validate(&self) -> Result<()> {
        // eta = 0 degenerates to plain least squares, which is fine on full-rank systems
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(precondition(format!(
                "RED eta must be non-negative, got {}",
                self.eta
            )));
        }
        if self.cg_iters == 0 || !(self.cg_tol >= 0.0) {
            return Err(precondition("RED needs cg_iters >= 1 and cg_tol >= 0"));
        }
        Ok(())
    }
}

/// Data-consistency step anchored at `x_i`, solved by CG warm-started at `x_i`.
pub fn red_condition<T: Real>(
    proj: &Projector<T>,
    x_i: &Image<T>,
    sino: &Sinogram<T>,
    cfg: &RedConfig,
) -> Result<CgOutcome<T>> {
    cfg.validate()?;
    proj.check_sinogram(sino)?;
    let eta = T::of(cfg.eta);
    let anchor = match cfg.form {
        RedPriorForm::Proximal => eta,
        RedPriorForm::Literal => eta / T::of(2.0),
    };
    let mut rhs = proj.back(sino)?;
    rhs.axpy(anchor, x_i);
    let normal = |x: &Image<T>| -> Result<Image<T>> {
        let mut y = proj.back(&proj.forward(x)?)?;
        y.axpy(eta, x);
        Ok(y)
    };
    cg_solve(normal, &rhs, x_i, T::of(cfg.cg_tol), cfg.cg_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::shepp_logan;
    use crate::tomo::{ImageGrid, ScanGeometry};

    fn setup() -> (Projector<f64>, Image<f64>, Sinogram<f64>) {
        let grid = ImageGrid::new(16, 1.0).unwrap();
        let geo = ScanGeometry::for_grid(&grid, 24).unwrap();
        let proj = Projector::new(grid, geo).unwrap();
        let truth = shepp_logan(grid);
        let sino = proj.forward(&truth).unwrap();
        (proj, truth, sino)
    }

    #[test]
    fn truth_is_a_fixed_point_on_consistent_data() {
        let (proj, truth, sino) = setup();
        for eta in [0.01, 1.0, 100.0] {
            let cfg = RedConfig {
                eta,
                cg_tol: 1e-10,
                cg_iters: 200,
                ..Default::default()
            };
            let out = red_condition(&proj, &truth, &sino, &cfg).unwrap();
            assert!(out.x.distance(&truth) <= 1e-8 * truth.norm(), "eta {eta}");
        }
    }

    #[test]
    fn huge_eta_stays_at_the_anchor() {
        let (proj, truth, sino) = setup();
        let anchor = truth.map(|v| v + 0.05);
        let cfg = RedConfig {
            eta: 1e6,
            cg_tol: 1e-12,
            cg_iters: 200,
            ..Default::default()
        };
        let out = red_condition(&proj, &anchor, &sino, &cfg).unwrap();
        assert!(out.x.distance(&anchor) <= 1e-3 * anchor.norm());
    }

    #[test]
    fn literal_form_halves_the_anchor_weight() {
        let (proj, truth, sino) = setup();
        let zero = Image::zeros(truth.grid());
        let lit = RedConfig {
            eta: 2.0,
            cg_tol: 1e-12,
            cg_iters: 500,
            form: RedPriorForm::Literal,
        };
        let prox = RedConfig {
            form: RedPriorForm::Proximal,
            ..lit
        };
        // with a zero anchor both forms solve the same system
        let a = red_condition(&proj, &zero, &sino, &lit).unwrap().x;
        let b = red_condition(&proj, &zero, &sino, &prox).unwrap().x;
        assert!(a.distance(&b) < 1e-8);
        // and the literal fixed point is no longer the truth
        let c = red_condition(&proj, &truth, &sino, &lit).unwrap().x;
        assert!(c.distance(&truth) > 1e-3);
    }

    #[test]
    fn rejects_negative_eta() {
        let (proj, truth, sino) = setup();
        let cfg = RedConfig {
            eta: -1.0,
            ..Default::default()
        };
        assert!(red_condition(&proj, &truth, &sino, &cfg).is_err());
    }
}
