use crate::classic::{
    fbp, os_sart_with, red_condition, sinogram_substitute, FilterSpec, OsSartConfig, RedConfig,
    SegThresholds,
};
use crate::error::Result;
use crate::scalar::Real;
use crate::sim::TraceMask;
use crate::tomo::{Image, ImageGrid, Projector, Sinogram};

/// How each sampler iterate is pulled toward the measurements.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ConditioningSpec {
    #[default]
    None,
    Red(RedConfig),
    OsSart(OsSartConfig),
    Mar {
        trace: TraceMask,
        thresholds: SegThresholds,
    },
}

impl ConditioningSpec {
    pub fn validate(&self, n_views: usize) -> Result<()> {
        match self {
            Self::None => Ok(()),
            Self::Red(c) => c.validate(),
            Self::OsSart(c) => c.validate(n_views),
            Self::Mar { thresholds, .. } => thresholds.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Red(_) => "red",
            Self::OsSart(_) => "ossart",
            Self::Mar { .. } => "mar",
        }
    }
}

/// A conditioning spec bound to a projector, reusable across sampler steps.
#[derive(Debug)]
pub struct Conditioner<'a, T> {
    proj: &'a Projector<T>,
    spec: &'a ConditioningSpec,
    filter: FilterSpec,
}

impl<'a, T: Real> Conditioner<'a, T> {
    pub fn new(proj: &'a Projector<T>, spec: &'a ConditioningSpec) -> Result<Self> {
        spec.validate(proj.geometry().n_views())?;
        Ok(Self {
            proj,
            spec,
            filter: FilterSpec::ram_lak(),
        })
    }

    pub fn projector(&self) -> &Projector<T> {
        self.proj
    }

    pub fn apply(&self, x: &Image<T>, sino: &Sinogram<T>) -> Result<Image<T>> {
        match self.spec {
            ConditioningSpec::None => Ok(x.clone()),
            ConditioningSpec::Red(cfg) => Ok(red_condition(self.proj, x, sino, cfg)?.x),
            ConditioningSpec::OsSart(cfg) => os_sart_with(self.proj, sino, x, cfg),
            ConditioningSpec::Mar { trace, thresholds } => {
                let filled = sinogram_substitute(self.proj, x, sino, trace, thresholds)?;
                fbp(&filled, *self.proj.grid(), &self.filter)
            }
        }
    }
}

/// One-off conditioning of `x` against `sino`.
pub fn condition<T: Real>(
    x: &Image<T>,
    sino: &Sinogram<T>,
    spec: &ConditioningSpec,
    grid: ImageGrid,
) -> Result<Image<T>> {
    if *spec == ConditioningSpec::None {
        return Ok(x.clone());
    }
    let proj = Projector::new(grid, sino.geometry().clone())?;
    Conditioner::new(&proj, spec)?.apply(x, sino)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::shepp_logan;
    use crate::tomo::ScanGeometry;

    fn setup() -> (Projector<f64>, Image<f64>, Sinogram<f64>) {
        let grid = ImageGrid::with_fov(32, 20.0).unwrap();
        let truth = shepp_logan::<f64>(grid);
        let proj = Projector::new(grid, ScanGeometry::for_grid(&grid, 24).unwrap()).unwrap();
        let sino = proj.forward(&truth).unwrap();
        (proj, truth, sino)
    }

    #[test]
    fn none_is_identity() {
        let (proj, truth, sino) = setup();
        let x = truth.map(|v| v * 0.5);
        assert_eq!(
            condition(&x, &sino, &ConditioningSpec::None, *proj.grid()).unwrap(),
            x
        );
    }

    #[test]
    fn red_fixed_point() {
        let (proj, truth, sino) = setup();
        let spec = ConditioningSpec::Red(RedConfig::default());
        let out = condition(&truth, &sino, &spec, *proj.grid()).unwrap();
        assert!(
            out.distance(&truth) <= 1e-9 * truth.norm(),
            "{}",
            out.distance(&truth)
        );
    }

    #[test]
    fn os_sart_reduces_residual() {
        let (proj, truth, sino) = setup();
        let x = Image::zeros(*proj.grid());
        let spec = ConditioningSpec::OsSart(OsSartConfig {
            n_subsets: 4,
            ..OsSartConfig::default()
        });
        let out = Conditioner::new(&proj, &spec)
            .unwrap()
            .apply(&x, &sino)
            .unwrap();
        let before = proj.forward(&x).unwrap().sub(&sino).norm();
        let after = proj.forward(&out).unwrap().sub(&sino).norm();
        assert!(after <= before);
        assert!(out.distance(&truth) < x.distance(&truth));
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let (proj, _, _) = setup();
        let spec = ConditioningSpec::OsSart(OsSartConfig {
            n_subsets: 100,
            ..OsSartConfig::default()
        });
        assert!(Conditioner::new(&proj, &spec).is_err());
    }
}
