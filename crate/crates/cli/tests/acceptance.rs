//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every criterion reports in order,
//! even after an earlier one fails.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use force_core::classic::{
    fbp, li_mar, os_sart_with, red_condition, sinogram_substitute, FilterSpec, OsSartConfig,
    RedConfig, SegThresholds,
};
use force_core::eval::{phase_scan, psnr};
use force_core::prior::{
    perturb, poisson_field, AnalyticDenoiser, Denoiser, DiscreteDataset, PfgmConfig, ToyNet,
    TrainingSample,
};
use force_core::sampler::{
    force_reconstruct, force_sample, Conditioner, ConditioningSpec, SamplerConfig,
};
use force_core::sim::{
    apply_low_dose, compute_trace, corrupt_metal_sinogram, insert_metal, shepp_logan,
    subsample_views, CorruptionMode, EllipsePhantomSpec, MetalDisc, MetalMask, NoiseModel,
};
use force_core::{Image64, ImageGrid, Projector64, ScanGeometry, Sinogram64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FOV: f64 = 20.0;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(limit: Duration, t: Instant) -> (bool, String) {
    let e = t.elapsed();
    (
        e <= limit,
        format!("{:.1}s of {}s", e.as_secs_f64(), limit.as_secs()),
    )
}

/// Jittered phantoms from one generator: `k` training images, then a held-out one.
fn phantom_family(grid: ImageGrid, k: usize, seed: u64) -> (Vec<Image64>, Image64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = EllipsePhantomSpec::shepp_logan();
    let train = (0..k)
        .map(|_| base.jittered(&mut rng, 0.5).render(grid))
        .collect();
    let held_out = base.jittered(&mut rng, 0.5).render(grid);
    (train, held_out)
}

fn region_psnr(x: &Image64, truth: &Image64, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let n = x.n();
    let (mut se, mut count) = (0.0, 0usize);
    for r in 0..n {
        for c in 0..n {
            if keep(r, c) {
                se += (x.get(r, c) - truth.get(r, c)).powi(2);
                count += 1;
            }
        }
    }
    10.0 * (count as f64 / se).log10()
}

fn adjoint_identity() -> Outcome {
    let t = Instant::now();
    let grid = ImageGrid::with_fov(64, FOV).unwrap();
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 90).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Image64::from_fn(grid, |_, _| rng.random_range(-1.0..1.0));
        let y_vals = (0..proj.geometry().len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let y = Sinogram64::new(proj.geometry().clone(), y_vals).unwrap();
        let hx = proj.forward(&x).unwrap();
        let hty = proj.back(&y).unwrap();
        let lhs: f64 = hx.values().iter().zip(y.values()).map(|(a, b)| a * b).sum();
        let rhs = x.dot(&hty);
        worst = worst.max((lhs - rhs).abs() / (hx.norm() * y.norm()));
    }
    let (fast, time) = within(Duration::from_secs(30), t);
    outcome(
        worst <= 1e-6 && fast,
        format!("worst scaled gap {worst:.2e} (<= 1e-6), {time}"),
    )
}

fn dense_oracle_cg() -> Outcome {
    let grid = ImageGrid::with_fov(8, FOV).unwrap();
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 10).unwrap()).unwrap();
    let (m, n) = (proj.geometry().len(), grid.len());
    let mut h = DMatrix::zeros(m, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = proj.forward(&Image64::new(grid, e).unwrap()).unwrap();
        h.set_column(j, &DVector::from_column_slice(col.values()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x_i = Image64::from_fn(grid, |_, _| rng.random_range(0.0..1.0));
    let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..4.0)).collect();
    let sino = Sinogram64::new(proj.geometry().clone(), p.clone()).unwrap();
    let mut errs = Vec::new();
    for eta in [0.01, 1.0, 100.0] {
        let cfg = RedConfig {
            eta,
            cg_tol: 1e-13,
            cg_iters: 1000,
            ..RedConfig::default()
        };
        let got = red_condition(&proj, &x_i, &sino, &cfg).unwrap().x;
        let a = h.transpose() * &h + DMatrix::identity(n, n) * eta;
        let b = h.transpose() * DVector::from_vec(p.clone())
            + DVector::from_column_slice(x_i.values()) * eta;
        let want = a.cholesky().expect("SPD").solve(&b);
        errs.push((DVector::from_column_slice(got.values()) - &want).norm() / want.norm());
    }
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= 1e-6,
        format!(
            "relative errors {:.1e} / {:.1e} / {:.1e} for eta 0.01 / 1 / 100 (<= 1e-6)",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn fbp_fidelity() -> Outcome {
    let t = Instant::now();
    let grid = ImageGrid::with_fov(128, FOV).unwrap();
    let truth: Image64 = shepp_logan(grid);
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 360).unwrap()).unwrap();
    let sino = proj.forward(&truth).unwrap();
    let img = fbp(&sino, grid, &FilterSpec::ram_lak()).unwrap();
    let lim = 0.6 * grid.half_extent();
    let db = region_psnr(&img, &truth, |r, c| {
        let (x, y) = grid.pixel_center(r, c);
        x * x + y * y <= lim * lim
    });
    let (fast, time) = within(Duration::from_secs(10), t);
    outcome(
        db >= 30.0 && fast,
        format!("interior-disc PSNR {db:.2} dB (>= 30), {time}"),
    )
}

fn os_sart_monotone() -> Outcome {
    let grid = ImageGrid::with_fov(64, FOV).unwrap();
    let truth: Image64 = shepp_logan(grid);
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 96).unwrap()).unwrap();
    let sino = proj.forward(&truth).unwrap();
    let cfg = OsSartConfig {
        n_subsets: 8,
        omega: 1.0,
        passes: 1,
        eps: 1e-8,
    };
    let mut x = Image64::zeros(grid);
    let mut res = vec![sino.norm()];
    for _ in 0..20 {
        x = os_sart_with(&proj, &sino, &x, &cfg).unwrap();
        res.push(proj.forward(&x).unwrap().sub(&sino).norm());
    }
    let strict = res.windows(2).all(|w| w[1] < w[0]);
    outcome(
        strict,
        format!(
            "residual {:.3e} -> {:.3e} over 20 passes, strictly decreasing: {strict}",
            res[0], res[20]
        ),
    )
}

fn diffusion_limit() -> Outcome {
    let (n, d, sigma, draws) = (64usize, 4096usize, 0.7, 100_000usize);
    let mut pf = PfgmConfig::for_pixels(n);
    pf.d = d;
    let grid = ImageGrid::new(8, 1.0).unwrap();
    let y = Image64::zeros(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut norm_sum, mut first_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let p = perturb(&y, sigma, &pf, &mut rng);
        norm_sum += p.image.norm();
        first_sq += p.image.values()[0].powi(2);
    }
    let norm_ratio = norm_sum / draws as f64 / (sigma * (n as f64).sqrt());
    let var_ratio = first_sq / draws as f64 / (sigma * sigma);
    outcome(
        (norm_ratio - 1.0).abs() <= 0.05 && (var_ratio - 1.0).abs() <= 0.10,
        format!("mean norm / sigma sqrt(N) = {norm_ratio:.4} (+-5%), var / sigma^2 = {var_ratio:.4} (+-10%)"),
    )
}

fn field_denoiser_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let side = rng.random_range(2..=6usize);
        let grid = ImageGrid::new(side, 1.0).unwrap();
        let k = rng.random_range(1..=8usize);
        let ds = DiscreteDataset::new(
            (0..k)
                .map(|_| Image64::from_fn(grid, |_, _| rng.random_range(0.0..1.0)))
                .collect(),
        )
        .unwrap();
        let mut pf = PfgmConfig::for_pixels(grid.len());
        pf.d = rng.random_range(1..=256usize);
        let x = Image64::from_fn(grid, |_, _| rng.random_range(-0.5..1.5));
        let sigma = 10f64.powf(rng.random_range(-2.0..0.5));
        let field = poisson_field(&ds, &x, sigma, &pf);
        let resid = x.sub(&AnalyticDenoiser::new(ds, &pf).denoise(&x, sigma).unwrap());
        let cos = field.dot(&resid) / (field.norm() * resid.norm());
        worst = worst.min(cos);
    }
    outcome(
        worst >= 1.0 - 1e-9,
        format!("minimum cosine {worst:.12} (>= 1 - 1e-9)"),
    )
}

fn gradient_check() -> Outcome {
    let mut net = ToyNet::<f64>::new(64, &[24, 16], 11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for p in net.params_mut() {
        *p += rng.random_range(-0.05..0.05);
    }
    let grid = ImageGrid::new(8, 1.0).unwrap();
    let samples: Vec<TrainingSample<f64>> = (0..4)
        .map(|_| TrainingSample {
            noisy: Image64::from_fn(grid, |_, _| rng.random_range(-1.0..1.5)),
            clean: Image64::from_fn(grid, |_, _| rng.random_range(0.0..1.0)),
            sigma: 10f64.powf(rng.random_range(-1.5..0.3)),
        })
        .collect();
    let (_, grad) = net.loss_and_grad(&samples, 0.5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let i = rng.random_range(0..net.params().len());
        let mut up = net.clone();
        up.params_mut()[i] += h;
        let mut down = net.clone();
        down.params_mut()[i] -= h;
        let fd = (up.loss(&samples, 0.5) - down.loss(&samples, 0.5)) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-8));
    }
    outcome(
        worst <= 1e-4,
        format!("worst relative error {worst:.2e} on 50 coordinates (<= 1e-4)"),
    )
}

fn generative_sanity() -> Outcome {
    let grid = ImageGrid::with_fov(8, FOV).unwrap();
    let a: Image64 = shepp_logan(grid);
    let b = a.map(|v| 0.5 * v + 0.1);
    let gap = a.distance(&b);
    let pf = PfgmConfig::for_pixels(grid.len());
    let f = AnalyticDenoiser::new(
        DiscreteDataset::new(vec![a.clone(), b.clone()]).unwrap(),
        &pf,
    );
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 8).unwrap()).unwrap();
    let sino = Sinogram64::zeros(proj.geometry().clone());
    let spec = ConditioningSpec::None;
    let cond = Conditioner::new(&proj, &spec).unwrap();
    let start = a.zip_map(&b, |p, q| 0.5 * (p + q));
    let (mut near_a, mut worst) = (0, 0.0f64);
    for seed in 0..20 {
        let cfg = SamplerConfig {
            steps: 40,
            seed,
            ..SamplerConfig::new(&pf)
        };
        let x = force_sample(&start, &sino, &cond, &f, &cfg, &pf, None).unwrap();
        let (da, db) = (x.distance(&a), x.distance(&b));
        worst = worst.max(da.min(db) / gap);
        near_a += usize::from(da < db);
    }
    outcome(
        worst <= 0.05 && (4..=16).contains(&near_a),
        format!(
            "farthest sample {worst:.2e} x |a-b| (<= 0.05), split {near_a}/{}",
            20 - near_a
        ),
    )
}

fn low_dose() -> Outcome {
    let grid = ImageGrid::with_fov(64, FOV).unwrap();
    let (train, truth) = phantom_family(grid, 64, 7);
    let geo = ScanGeometry::for_grid(&grid, 180).unwrap();
    let clean = Projector64::new(grid, geo)
        .unwrap()
        .forward(&truth)
        .unwrap();
    let sino = apply_low_dose(&clean, &NoiseModel::quarter_dose(2e3, 1)).unwrap();
    let t = Instant::now();
    let base = fbp(&sino, grid, &FilterSpec::ram_lak()).unwrap();
    let pf = PfgmConfig::for_pixels(grid.len());
    let f = AnalyticDenoiser::new(DiscreteDataset::new(train).unwrap(), &pf);
    let spec = ConditioningSpec::Red(RedConfig::default());
    let out = force_reconstruct(&sino, &spec, &f, &SamplerConfig::new(&pf), &pf, grid).unwrap();
    let (fast, time) = within(Duration::from_secs(120), t);
    let (p_fbp, p_force) = (
        psnr(&base, &truth, 1.0).unwrap(),
        psnr(&out, &truth, 1.0).unwrap(),
    );
    outcome(
        p_force - p_fbp >= 3.0 && fast,
        format!(
            "FBP {p_fbp:.2} dB, FORCE+RED {p_force:.2} dB, gain {:.2} dB (>= 3), {time}",
            p_force - p_fbp
        ),
    )
}

fn sparse_view() -> Outcome {
    let grid = ImageGrid::with_fov(128, FOV).unwrap();
    let (train, truth) = phantom_family(grid, 64, 8);
    let full = ScanGeometry::for_grid(&grid, 360).unwrap();
    let sino = subsample_views(
        &Projector64::new(grid, full)
            .unwrap()
            .forward(&truth)
            .unwrap(),
        96,
    )
    .unwrap();
    let t = Instant::now();
    let base = fbp(&sino, grid, &FilterSpec::ram_lak()).unwrap();
    let pf = PfgmConfig::for_pixels(grid.len());
    let f = AnalyticDenoiser::new(DiscreteDataset::new(train).unwrap(), &pf);
    let spec = ConditioningSpec::OsSart(OsSartConfig::default());
    let out = force_reconstruct(&sino, &spec, &f, &SamplerConfig::new(&pf), &pf, grid).unwrap();
    let (fast, time) = within(Duration::from_secs(120), t);
    let (p_fbp, p_force) = (
        psnr(&base, &truth, 1.0).unwrap(),
        psnr(&out, &truth, 1.0).unwrap(),
    );
    outcome(
        p_force - p_fbp >= 5.0 && fast,
        format!("96 views: FBP {p_fbp:.2} dB, FORCE+OS-SART {p_force:.2} dB, gain {:.2} dB (>= 5), {time}", p_force - p_fbp),
    )
}

fn metal_artifacts() -> Outcome {
    let grid = ImageGrid::with_fov(64, FOV).unwrap();
    let (train, truth) = phantom_family(grid, 64, 9);
    let discs = [
        MetalDisc {
            center: (-0.3, 0.1),
            radius: 0.05,
            intensity: 3.0,
        },
        MetalDisc {
            center: (0.3, 0.1),
            radius: 0.05,
            intensity: 3.0,
        },
    ];
    let (with_metal, mask): (Image64, MetalMask) = insert_metal(&truth, &discs).unwrap();
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 180).unwrap()).unwrap();
    let trace = compute_trace(&mask, proj.geometry(), 1).unwrap();
    let sino = corrupt_metal_sinogram(
        &proj.forward(&with_metal).unwrap(),
        &trace,
        CorruptionMode::Void,
    )
    .unwrap();

    let filled =
        sinogram_substitute(&proj, &truth, &sino, &trace, &SegThresholds::default()).unwrap();
    let untouched = filled
        .values()
        .iter()
        .zip(sino.values())
        .zip(trace.as_slice())
        .all(|((a, b), &m)| m || a.to_bits() == b.to_bits());

    let li = fbp(
        &li_mar(&sino, &trace).unwrap(),
        grid,
        &FilterSpec::ram_lak(),
    )
    .unwrap();
    let pf = PfgmConfig::for_pixels(grid.len());
    let f = AnalyticDenoiser::new(DiscreteDataset::new(train).unwrap(), &pf);
    let spec = ConditioningSpec::Mar {
        trace: trace.clone(),
        thresholds: SegThresholds::default(),
    };
    let out = force_reconstruct(&sino, &spec, &f, &SamplerConfig::new(&pf), &pf, grid).unwrap();
    let outside = |r: usize, c: usize| !mask.as_slice()[r * grid.n() + c];
    let (p_li, p_force) = (
        region_psnr(&li, &truth, outside),
        region_psnr(&out, &truth, outside),
    );
    outcome(
        untouched && p_force >= p_li,
        format!(
            "out-of-trace bit-identical: {untouched}; outside metal: LI-MAR {p_li:.2} dB, FORCE-MAR {p_force:.2} dB"
        ),
    )
}

fn phase_scan_shape() -> Outcome {
    let grid = ImageGrid::with_fov(64, FOV).unwrap();
    let (clean, _) = phantom_family(grid, 16, 10);
    let proj = Projector64::new(grid, ScanGeometry::for_grid(&grid, 360).unwrap()).unwrap();
    let corrupted: Vec<Image64> = clean
        .iter()
        .enumerate()
        .map(|(i, im)| {
            let s = apply_low_dose(
                &proj.forward(im).unwrap(),
                &NoiseModel::quarter_dose(2e3, i as u64),
            )
            .unwrap();
            fbp(&s, grid, &FilterSpec::ram_lak()).unwrap()
        })
        .collect();
    let sigma_max = PfgmConfig::for_pixels(grid.len()).sigma_max;
    let sigmas = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, sigma_max];
    let d = phase_scan(
        &corrupted,
        &clean,
        &sigmas,
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap()
    .distances;
    let decays = d[d.len() - 1] <= 0.1 * d[0];
    let monotone = d.windows(2).all(|w| w[1] <= w[0] + 0.1 * d[0]);
    outcome(
        decays && monotone,
        format!(
            "d(0) = {:.3e}, d(sigma_max) / d(0) = {:.3} (<= 0.1), non-increasing within 10%: {monotone}",
            d[0],
            d[d.len() - 1] / d[0]
        ),
    )
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_force"))
        .args(args)
        .status()
        .expect("binary runs");
    assert!(status.success(), "force {args:?} failed with {status}");
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    run_cli(&[
        "phantom",
        "--size",
        "32",
        "--out",
        &p("truth.timg"),
        "--jitter",
        "0.5",
        "--seed",
        "99",
    ]);
    run_cli(&[
        "phantom",
        "--size",
        "32",
        "--count",
        "8",
        "--jitter",
        "0.5",
        "--seed",
        "3",
        "--out",
        &p("prior"),
    ]);
    run_cli(&[
        "simulate",
        "--input",
        &p("truth.timg"),
        "--out",
        &p("low.tsin"),
        "--task",
        "lowdose",
        "--i0",
        "2000",
        "--full-views",
        "90",
        "--seed",
        "4",
    ]);
    run_cli(&[
        "simulate",
        "--input",
        &p("truth.timg"),
        "--out",
        &p("sparse.tsin"),
        "--task",
        "sparse",
        "--full-views",
        "180",
        "--views",
        "48",
    ]);
    fs::write(
        p("run.cfg"),
        format!(
            "method = force\nanalytic = {}\nsteps = 12\nseed = 17\ninit_noise = gaussian\n",
            p("prior")
        ),
    )
    .unwrap();
    let mut identical = true;
    for (task, input) in [("lowdose", "low.tsin"), ("sparse", "sparse.tsin")] {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "4", "1", "3"].iter().enumerate() {
            let out = p(&format!("{task}_{k}.timg"));
            let diag = p(&format!("{task}_{k}.csv"));
            run_cli(&[
                "reconstruct",
                "--config",
                &p("run.cfg"),
                "--task",
                task,
                "--input",
                &p(input),
                "--out",
                &out,
                "--diagnostics",
                &diag,
                "--threads",
                threads,
            ]);
            outputs.push((fs::read(&out).unwrap(), fs::read(&diag).unwrap()));
        }
        identical &= outputs.windows(2).all(|w| w[0] == w[1]);
    }
    outcome(
        identical,
        format!("lowdose and sparse reruns at 1/4/1/3 threads bit-identical: {identical}"),
    )
}

fn main() {
    let criteria: [Check; 13] = [
        ("adjoint identity", adjoint_identity),
        ("dense-oracle CG", dense_oracle_cg),
        ("FBP fidelity", fbp_fidelity),
        ("OS-SART monotonicity", os_sart_monotone),
        ("diffusion limit", diffusion_limit),
        ("field/denoiser consistency", field_denoiser_consistency),
        ("gradient check", gradient_check),
        ("generative sanity", generative_sanity),
        ("desk-scale low-dose", low_dose),
        ("desk-scale sparse-view", sparse_view),
        ("desk-scale MAR", metal_artifacts),
        ("phase scan", phase_scan_shape),
        ("determinism", determinism),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += usize::from(!result.pass);
        let tag = if result.pass { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{tag} criterion {:>2} {name}: {}",
            i + 1,
            result.detail
        )
        .unwrap();
    }
    writeln!(out, "acceptance: {} failed", failed).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
