use force_core::prior::{PfgmConfig, ToyNet};
use force_core::sim::shepp_logan;
use force_core::tomo::ImageGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Fixed noise level: at a single sigma the exact denoiser is affine in its
// input, which the skip path can represent.
#[test]
fn single_image_loss_collapses() {
    let grid = ImageGrid::with_fov(8, 20.0).unwrap();
    let y = shepp_logan::<f64>(grid);
    let mut pf = PfgmConfig::for_pixels(64);
    pf.p_std = 0.0;
    let mut net = ToyNet::<f64>::new(64, &[32], 0).unwrap();
    let held = ToyNet::draw_samples(
        &vec![y.clone(); 256],
        &pf,
        &mut ChaCha8Rng::seed_from_u64(1000),
    );
    let initial = net.loss(&held, pf.sigma_data);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let batch = vec![y; 8];
    let mut reached = None;
    for step in 1..=5000 {
        let loss = net.train_step(&batch, &pf, &mut rng, 0.5).unwrap();
        assert!(loss >= 0.0);
        if step % 250 == 0 && net.loss(&held, pf.sigma_data) < 1e-3 * initial {
            reached = Some(step);
            break;
        }
    }
    assert!(
        reached.is_some(),
        "final ratio {}",
        net.loss(&held, pf.sigma_data) / initial
    );
}

#[test]
fn resumed_training_repeats_the_next_loss() {
    let grid = ImageGrid::with_fov(8, 20.0).unwrap();
    let y = shepp_logan::<f64>(grid);
    let pf = PfgmConfig::for_pixels(64);
    let mut net = ToyNet::<f64>::new(64, &[16], 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        net.train_step(std::slice::from_ref(&y), &pf, &mut rng, 0.05)
            .unwrap();
    }
    let mut buf = Vec::new();
    force_core::prior::write_checkpoint(&net, &mut buf).unwrap();
    let mut copy: ToyNet<f64> = force_core::prior::read_checkpoint(buf.as_slice()).unwrap();
    let a = net
        .train_step(
            std::slice::from_ref(&y),
            &pf,
            &mut ChaCha8Rng::seed_from_u64(77),
            0.05,
        )
        .unwrap();
    let b = copy
        .train_step(&[y], &pf, &mut ChaCha8Rng::seed_from_u64(77), 0.05)
        .unwrap();
    assert_eq!(a, b);
}
