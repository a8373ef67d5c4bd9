//! Small fully-connected denoiser with hand-written backpropagation.
//!
//! Input is the EDM-scaled image `c_in x` with `c_noise` appended; hidden
//! layers use `tanh`; the output layer is linear and a linear skip path maps
//! the input straight to the output. All parameters live in one flat vector,
//! per layer `W` (row-major, out x in) then `b`, followed by the skip matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{precondition as bad_input, shape, Error, Result};
use crate::prior::{perturb, sample_sigma, Denoiser, EdmScalings, PfgmConfig};
use crate::scalar::Real;
use crate::tomo::Image;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyNet<T> {
    dims: Vec<usize>,
    params: Vec<T>,
}

/// One perturbed training pair.
#[derive(Debug, Clone)]
pub struct TrainingSample<T> {
    pub noisy: Image<T>,
    pub clean: Image<T>,
    pub sigma: f64,
}

fn param_count(dims: &[usize]) -> usize {
    let layers: usize = dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum();
    layers + dims[dims.len() - 1] * dims[0]
}

impl<T: Real> ToyNet<T> {
    /// Network for `pixels`-sized images with the given hidden widths,
    /// Glorot-uniform weights, zero biases and a zero skip path.
    pub fn new(pixels: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if pixels == 0 || hidden.contains(&0) {
            return Err(bad_input("layer widths must be positive"));
        }
        let mut dims = vec![pixels + 1];
        dims.extend_from_slice(hidden);
        dims.push(pixels);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(&dims));
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| T::of(rng.random_range(-limit..limit))));
            params.extend(std::iter::repeat_n(T::zero(), fan_out));
        }
        params.extend(std::iter::repeat_n(T::zero(), pixels * (pixels + 1)));
        Ok(Self { dims, params })
    }

    /// Rebuilds a network from its layer widths and flat parameters.
    pub fn from_parts(dims: Vec<usize>, params: Vec<T>) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) || dims[0] != dims[dims.len() - 1] + 1 {
            return Err(shape(format!("invalid layer widths {dims:?}")));
        }
        let expected = param_count(&dims);
        if params.len() != expected {
            return Err(shape(format!(
                "{dims:?} needs {expected} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(bad_input("non-finite network parameter"));
        }
        Ok(Self { dims, params })
    }

    /// Layer widths, input (pixels + 1) first.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn pixels(&self) -> usize {
        self.dims[self.dims.len() - 1]
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// Runs the raw network, returning every layer's activation (input first)
    /// and the output.
    fn forward_cached(&self, input: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
        let n_layers = self.dims.len() - 1;
        let mut acts = vec![input.to_vec()];
        let mut offset = 0;
        let mut out = Vec::new();
        for l in 0..n_layers {
            let (fi, fo) = (self.dims[l], self.dims[l + 1]);
            let w = &self.params[offset..offset + fi * fo];
            let b = &self.params[offset + fi * fo..offset + fi * fo + fo];
            offset += fi * fo + fo;
            let a = &acts[l];
            let z: Vec<T> = (0..fo)
                .map(|o| {
                    w[o * fi..(o + 1) * fi]
                        .iter()
                        .zip(a)
                        .fold(b[o], |s, (&wi, &ai)| s + wi * ai)
                })
                .collect();
            if l + 1 < n_layers {
                acts.push(z.into_iter().map(|v| v.tanh()).collect());
            } else {
                out = z;
            }
        }
        let skip = &self.params[offset..];
        let fi = self.dims[0];
        for (o, v) in out.iter_mut().enumerate() {
            *v += skip[o * fi..(o + 1) * fi]
                .iter()
                .zip(input)
                .fold(T::zero(), |s, (&wi, &ai)| s + wi * ai);
        }
        (acts, out)
    }

    /// Accumulates `d out / d params` contracted with `g` into `grad`.
    fn backward(&self, acts: &[Vec<T>], g: &[T], grad: &mut [T]) {
        let n_layers = self.dims.len() - 1;
        let offsets: Vec<usize> = self
            .dims
            .windows(2)
            .scan(0, |acc, w| {
                let start = *acc;
                *acc += w[0] * w[1] + w[1];
                Some(start)
            })
            .collect();
        let skip_offset = offsets[n_layers - 1]
            + self.dims[n_layers - 1] * self.dims[n_layers]
            + self.dims[n_layers];
        let fi = self.dims[0];
        for (o, &go) in g.iter().enumerate() {
            for (gs, &a) in grad[skip_offset + o * fi..skip_offset + (o + 1) * fi]
                .iter_mut()
                .zip(&acts[0])
            {
                *gs += go * a;
            }
        }
        let mut delta = g.to_vec();
        for l in (0..n_layers).rev() {
            let (fi, fo) = (self.dims[l], self.dims[l + 1]);
            let off = offsets[l];
            let a = &acts[l];
            for o in 0..fo {
                let d = delta[o];
                for (gw, &ai) in grad[off + o * fi..off + (o + 1) * fi].iter_mut().zip(a) {
                    *gw += d * ai;
                }
                grad[off + fi * fo + o] += d;
            }
            if l > 0 {
                let w = &self.params[off..off + fi * fo];
                delta = (0..fi)
                    .map(|i| {
                        let back = (0..fo).fold(T::zero(), |s, o| s + w[o * fi + i] * delta[o]);
                        back * (T::one() - a[i] * a[i])
                    })
                    .collect();
            }
        }
    }

    fn input_for(&self, x: &Image<T>, sc: &EdmScalings) -> Vec<T> {
        let c_in = T::of(sc.c_in);
        x.values()
            .iter()
            .map(|&v| c_in * v)
            .chain(std::iter::once(T::of(sc.c_noise)))
            .collect()
    }

    /// Raw network output for an image at noise level `sigma`.
    pub fn raw(&self, x: &Image<T>, sigma: f64, sigma_data: f64) -> Vec<T> {
        let sc = EdmScalings::new(sigma, sigma_data);
        self.forward_cached(&self.input_for(x, &sc)).1
    }

    /// Mean preconditioned loss `c_out^-2 ||f(x, sigma) - y||^2 / (B N)` and its gradient.
    pub fn loss_and_grad(&self, samples: &[TrainingSample<T>], sigma_data: f64) -> (T, Vec<T>) {
        let mut grad = vec![T::zero(); self.params.len()];
        let mut loss = T::zero();
        let scale = T::one() / T::of_usize(samples.len() * self.pixels());
        for s in samples {
            let sc = EdmScalings::new(s.sigma, sigma_data);
            let (acts, out) = self.forward_cached(&self.input_for(&s.noisy, &sc));
            let (c_skip, inv_out) = (T::of(sc.c_skip), T::of(1.0 / sc.c_out));
            let diff: Vec<T> = out
                .iter()
                .zip(s.noisy.values().iter().zip(s.clean.values()))
                .map(|(&r, (&x, &y))| r - (y - c_skip * x) * inv_out)
                .collect();
            loss += diff.iter().fold(T::zero(), |acc, &d| acc + d * d);
            let g: Vec<T> = diff.iter().map(|&d| T::of(2.0) * d * scale).collect();
            self.backward(&acts, &g, &mut grad);
        }
        (loss * scale, grad)
    }

    pub fn loss(&self, samples: &[TrainingSample<T>], sigma_data: f64) -> T {
        self.loss_and_grad(samples, sigma_data).0
    }

    /// Perturbs each clean image once with a freshly drawn noise level.
    pub fn draw_samples<R: Rng + ?Sized>(
        batch: &[Image<T>],
        cfg: &PfgmConfig,
        rng: &mut R,
    ) -> Vec<TrainingSample<T>> {
        batch
            .iter()
            .map(|y| {
                let sigma = sample_sigma(cfg, rng);
                let noisy = perturb(y, sigma, cfg, rng).image;
                TrainingSample {
                    noisy,
                    clean: y.clone(),
                    sigma,
                }
            })
            .collect()
    }

    /// One plain gradient-descent step on a freshly perturbed batch; returns the batch loss.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        batch: &[Image<T>],
        cfg: &PfgmConfig,
        rng: &mut R,
        lr: f64,
    ) -> Result<T> {
        if !(lr > 0.0) {
            return Err(bad_input(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        if batch.is_empty() {
            return Err(bad_input("empty training batch"));
        }
        if let Some(bad) = batch.iter().position(|y| y.values().len() != self.pixels()) {
            return Err(shape(format!(
                "batch image {bad} does not match the network size"
            )));
        }
        let samples = Self::draw_samples(batch, cfg, rng);
        let (loss, grad) = self.loss_and_grad(&samples, cfg.sigma_data);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical {
                step: 0,
                what: "non-finite training loss".into(),
            });
        }
        let lr = T::of(lr);
        for (p, g) in self.params.iter_mut().zip(grad) {
            *p -= lr * g;
        }
        Ok(loss)
    }

    pub fn denoiser(&self, sigma_data: f64) -> NetDenoiser<'_, T> {
        NetDenoiser {
            net: self,
            sigma_data,
        }
    }
}

/// `f(x, sigma) = c_skip x + c_out raw(c_in x, c_noise)`.
pub fn precondition<T: Real>(
    raw: &ToyNet<T>,
    x: &Image<T>,
    sigma: f64,
    cfg: &PfgmConfig,
) -> Result<Image<T>> {
    raw.denoiser(cfg.sigma_data).denoise(x, sigma)
}

/// A [`ToyNet`] wrapped with EDM preconditioning.
#[derive(Debug, Clone, Copy)]
pub struct NetDenoiser<'a, T> {
    net: &'a ToyNet<T>,
    sigma_data: f64,
}

impl<T: Real> Denoiser<T> for NetDenoiser<'_, T> {
    fn denoise(&self, x: &Image<T>, sigma: f64) -> Result<Image<T>> {
        if x.values().len() != self.net.pixels() {
            return Err(shape(format!(
                "network expects {} pixels, image has {}",
                self.net.pixels(),
                x.values().len()
            )));
        }
        if sigma == 0.0 {
            return Ok(x.clone());
        }
        if !(sigma > 0.0) {
            return Err(bad_input(format!("sigma must be positive, got {sigma}")));
        }
        let sc = EdmScalings::new(sigma, self.sigma_data);
        let raw = self.net.raw(x, sigma, self.sigma_data);
        let (c_skip, c_out) = (T::of(sc.c_skip), T::of(sc.c_out));
        Ok(Image::from_raw(
            x.grid(),
            x.values()
                .iter()
                .zip(raw)
                .map(|(&xv, r)| c_skip * xv + c_out * r)
                .collect(),
        ))
    }
}
