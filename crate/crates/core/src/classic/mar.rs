use crate::error::{precondition, Result};
use crate::scalar::Real;
use crate::sim::TraceMask;
use crate::tomo::{Image, Projector, Sinogram};

/// Linear interpolation across every in-trace run of each view.
///
/// Runs touching either end of the detector row take the nearest valid value.
pub fn li_mar<T: Real>(sino: &Sinogram<T>, trace: &TraceMask) -> Result<Sinogram<T>> {
    trace.check(sino)?;
    let mut out = sino.clone();
    for view in 0..sino.n_views() {
        let mask = trace.row(view);
        if mask.iter().all(|&m| m) {
            return Err(precondition(format!(
                "view {view} is entirely inside the metal trace"
            )));
        }
        let row = out.row_mut(view);
        for (start, end) in runs(mask) {
            let left = start.checked_sub(1).map(|i| row[i]);
            let right = (end < row.len()).then(|| row[end]);
            for (k, v) in row.iter_mut().enumerate().take(end).skip(start) {
                *v = match (left, right) {
                    (Some(a), Some(b)) => {
                        let t = T::of_usize(k + 1 - start) / T::of_usize(end - start + 1);
                        a + t * (b - a)
                    }
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!("fully masked views are rejected"),
                };
            }
        }
    }
    Ok(out)
}

/// Half-open `[start, end)` runs of `true`.
fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < mask.len() {
        if mask[k] {
            let start = k;
            while k < mask.len() && mask[k] {
                k += 1;
            }
            out.push((start, k));
        } else {
            k += 1;
        }
    }
    out
}

/// Class boundaries for the piecewise-constant prior image, in image units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegThresholds {
    pub air_soft: f64,
    pub soft_bone: f64,
    pub bone_metal: f64,
}

impl Default for SegThresholds {
    /// Tuned to the `[0, 1]` head phantom: air/ventricles near 0, soft tissue
    /// 0.2-0.3, skull 1, metal far above.
    fn default() -> Self {
        Self {
            air_soft: 0.1,
            soft_bone: 0.6,
            bone_metal: 2.0,
        }
    }
}

impl SegThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.air_soft < self.soft_bone && self.soft_bone < self.bone_metal) {
            return Err(precondition(format!(
                "segmentation thresholds out of order: {self:?}"
            )));
        }
        Ok(())
    }

    fn class(&self, v: f64) -> usize {
        if v < self.air_soft {
            0
        } else if v < self.soft_bone {
            1
        } else if v < self.bone_metal {
            2
        } else {
            3
        }
    }
}

/// Piecewise-constant tissue image: every pixel takes the mean of its class,
/// metal takes the soft-tissue mean.
pub fn tissue_prior<T: Real>(x: &Image<T>, th: &SegThresholds) -> Result<Image<T>> {
    th.validate()?;
    let classes: Vec<usize> = x.values().iter().map(|v| th.class(v.as_f64())).collect();
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for (&c, v) in classes.iter().zip(x.values()) {
        if c < 3 {
            sums[c] += v.as_f64();
            counts[c] += 1;
        }
    }
    let fallback = [
        0.0,
        (th.air_soft + th.soft_bone) / 2.0,
        (th.soft_bone + th.bone_metal) / 2.0,
    ];
    let means: Vec<f64> = (0..3)
        .map(|c| {
            if counts[c] > 0 {
                sums[c] / counts[c] as f64
            } else {
                fallback[c]
            }
        })
        .collect();
    Ok(Image::from_raw(
        x.grid(),
        classes
            .iter()
            .map(|&c| T::of(means[if c == 3 { 1 } else { c }]))
            .collect(),
    ))
}

/// Replaces in-trace bins by the projection of a tissue prior built from `x_i`.
///
/// Per view and per run, the prior projection is shifted by a linear ramp
/// that matches the measured values at the two out-of-trace neighbours, so
/// the result is continuous at the trace boundary. Out-of-trace bins are
/// returned bit-identical.
pub fn sinogram_substitute<T: Real>(
    proj: &Projector<T>,
    x_i: &Image<T>,
    sino: &Sinogram<T>,
    trace: &TraceMask,
    th: &SegThresholds,
) -> Result<Sinogram<T>> {
    trace.check(sino)?;
    th.validate()?;
    if trace.is_empty() {
        return Ok(sino.clone());
    }
    let prior = proj.forward(&tissue_prior(x_i, th)?)?;
    Ok(substitute_with_prior(sino, &prior, trace))
}

pub(crate) fn substitute_with_prior<T: Real>(
    sino: &Sinogram<T>,
    prior: &Sinogram<T>,
    trace: &TraceMask,
) -> Sinogram<T> {
    let mut out = sino.clone();
    for view in 0..sino.n_views() {
        let measured = sino.row(view);
        let synth = prior.row(view);
        let row = out.row_mut(view);
        for (start, end) in runs(trace.row(view)) {
            let left = start.checked_sub(1).map(|i| (i, measured[i] - synth[i]));
            let right = (end < measured.len()).then(|| (end, measured[end] - synth[end]));
            for k in start..end {
                let shift = match (left, right) {
                    (Some((l, a)), Some((r, b))) => {
                        a + T::of_usize(k - l) / T::of_usize(r - l) * (b - a)
                    }
                    (Some((_, a)), None) => a,
                    (None, Some((_, b))) => b,
                    (None, None) => T::zero(),
                };
                row[k] = synth[k] + shift;
            }
        }
    }
    out
}
