use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vidrestore::degrade::{Degradation, Identity, LinearOp, MatrixOperator, Task, TaskKind};
use vidrestore::diffusion::{
    GaussianAnalyticPrior, IdentityCodec, LatentCodec, LatentStack, NoiseSchedule, OrthoCodec, Restorer, SolverConfig,
};
use vidrestore::mpes::{
    deviation_curve, fuse_latent, fuse_pixel, mmse_oracle_gaussian, path_seed, post_fusion_refine, run_ensemble,
    run_paths, EnsembleConfig, FusionSpace, GaussianPosterior, PathResult,
};
use vidrestore::seqio::{make_synthetic, Dims, FrameSequence, SyntheticKind, SyntheticSpec};
use vidrestore::Error;

fn setup(seed: u64) -> (FrameSequence, Restorer) {
    let x = make_synthetic(&SyntheticSpec::new(SyntheticKind::TranslatingTexture, 4, 16, 16, 1.0, seed)).unwrap();
    let op = Task::new(TaskKind::Sr).build(x.dims()).unwrap();
    let y = op.forward(&x).unwrap();
    let prior = Arc::new(GaussianAnalyticPrior::constant(256, 0.5, 0.05).unwrap());
    let r = Restorer::new(y, op, prior, Arc::new(IdentityCodec::new(16, 16, 1)), NoiseSchedule::default()).unwrap();
    (x, r)
}

fn ens(paths: usize, base_seed: u64) -> EnsembleConfig {
    EnsembleConfig {
        paths,
        base_seed,
        ..Default::default()
    }
}

fn fake_path(pixels: FrameSequence, codec: &dyn LatentCodec) -> PathResult {
    PathResult {
        latent: codec.encode(&pixels).unwrap(),
        pixels,
        seed: 0,
        log: Vec::new(),
    }
}

fn random_seq(dims: Dims, rng: &mut ChaCha8Rng) -> FrameSequence {
    FrameSequence::new(dims, (0..dims.len()).map(|_| rng.random::<f64>()).collect()).unwrap()
}

#[test]
fn single_path_equals_plain_solve() {
    let (_, r) = setup(1);
    let paths = run_paths(&r, &SolverConfig::default(), &ens(1, 7)).unwrap();
    let direct = r.solve(&SolverConfig::default().with_seed(path_seed(7, 0))).unwrap();
    assert_eq!(paths[0].pixels, direct.pixels);
    assert_eq!(paths[0].latent, direct.latent);
}

#[test]
fn paths_are_reproducible_and_diverse() {
    let (_, r) = setup(2);
    let a = run_paths(&r, &SolverConfig::default(), &ens(4, 3)).unwrap();
    let b = run_paths(&r, &SolverConfig::default(), &ens(4, 3)).unwrap();
    assert_eq!(a, b);
    for i in 0..4 {
        for j in i + 1..4 {
            assert!(a[i].pixels.max_abs_diff(&a[j].pixels).unwrap() > 0.0, "paths {i} and {j}");
        }
    }
}

#[test]
fn pixel_fusion_examples() {
    let codec = IdentityCodec::new(4, 4, 1);
    let dims = Dims::new(2, 4, 4, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_seq(dims, &mut rng);
    let same = vec![fake_path(x.clone(), &codec); 3];
    assert_eq!(fuse_pixel(&same).unwrap(), x);
    assert_eq!(fuse_latent(&same, &codec).unwrap(), x);

    let neg = x.with_data(x.data().iter().map(|v| -v).collect()).unwrap();
    let opposite = [fake_path(x.clone(), &codec), fake_path(neg, &codec)];
    assert!(fuse_pixel(&opposite).unwrap().data().iter().all(|v| *v == 0.0));

    let three: Vec<PathResult> = (0..3).map(|_| fake_path(random_seq(dims, &mut rng), &codec)).collect();
    let fused = fuse_pixel(&three).unwrap();
    for i in 0..dims.len() {
        let want = three.iter().map(|p| p.pixels.data()[i]).sum::<f64>() / 3.0;
        assert!((fused.data()[i] - want).abs() < 1e-12);
    }
    let mut permuted = three.clone();
    permuted.rotate_left(1);
    assert!(fuse_pixel(&permuted).unwrap().max_abs_diff(&fused).unwrap() < 1e-12);

    let other = fake_path(FrameSequence::zeros(Dims::new(3, 4, 4, 1)).unwrap(), &codec);
    assert!(matches!(fuse_pixel(&[three[0].clone(), other]), Err(Error::Validation(_))));
}

#[test]
fn latent_fusion_versus_pixel_fusion() {
    let dims = Dims::new(2, 8, 8, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lossless = OrthoCodec::lossless(8, 8, 1).unwrap();
    let paths: Vec<PathResult> = (0..3).map(|_| fake_path(random_seq(dims, &mut rng), &lossless)).collect();
    assert!(fuse_latent(&paths, &lossless).unwrap().max_abs_diff(&fuse_pixel(&paths).unwrap()).unwrap() < 1e-6);

    let truncated = OrthoCodec::new(8, 8, 1, 0.25).unwrap();
    let paths: Vec<PathResult> = (0..3).map(|_| fake_path(random_seq(dims, &mut rng), &truncated)).collect();
    assert!(fuse_latent(&paths, &truncated).unwrap().max_abs_diff(&fuse_pixel(&paths).unwrap()).unwrap() > 1e-6);
}

#[test]
fn post_refinement_contracts() {
    let dims = Dims::new(1, 4, 4, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fused = random_seq(dims, &mut rng);
    let y = random_seq(dims, &mut rng);
    let id = Identity::new(dims).unwrap();
    assert_eq!(post_fusion_refine(&fused, &y, &id, 0).unwrap(), fused);
    assert!(post_fusion_refine(&fused, &y, &id, 1).unwrap().max_abs_diff(&y).unwrap() < 1e-12);

    let (_, r) = setup(6);
    let paths = run_paths(&r, &SolverConfig::default(), &ens(2, 1)).unwrap();
    let f = fuse_pixel(&paths).unwrap();
    let refined = post_fusion_refine(&f, r.measurements(), r.operator().as_ref(), 5).unwrap();
    assert!(r.residual(&refined).unwrap() <= r.residual(&f).unwrap());
}

#[test]
fn ensemble_output_respects_fusion_space() {
    let (_, r) = setup(7);
    let mut cfg = ens(3, 2);
    let pixel = run_ensemble(&r, &SolverConfig::default(), &cfg).unwrap();
    assert_eq!(pixel.fused, fuse_pixel(&pixel.paths).unwrap());
    cfg.fusion = FusionSpace::Latent;
    cfg.post_refine = Some(3);
    let latent = run_ensemble(&r, &SolverConfig::default(), &cfg).unwrap();
    assert_eq!(latent.paths, pixel.paths);
    let want = post_fusion_refine(&fuse_latent(&latent.paths, r.codec()).unwrap(), r.measurements(), r.operator().as_ref(), 3).unwrap();
    assert_eq!(latent.fused, want);
}

#[test]
fn oracle_limits() {
    let dims = Dims::new(1, 3, 3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y = random_seq(dims, &mut rng);
    let mu = random_seq(dims, &mut rng);
    let id = Identity::new(dims).unwrap();
    assert!(mmse_oracle_gaussian(&y, &id, &mu, 1.0, 1e-12).unwrap().max_abs_diff(&y).unwrap() < 1e-9);
    assert!(mmse_oracle_gaussian(&y, &id, &mu, 1e-14, 1.0).unwrap().max_abs_diff(&mu).unwrap() < 1e-12);

    // rank-deficient operator with noiseless measurements
    let flat = Dims::new(1, 1, 2, 1);
    let one = Dims::new(1, 1, 1, 1);
    let sum: Degradation = Arc::new(MatrixOperator::new(flat, one, vec![1.0, 1.0]).unwrap());
    let m = MatrixOperator::new(flat, flat, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
    let y2 = FrameSequence::new(flat, vec![1.0, 1.0]).unwrap();
    let mu2 = FrameSequence::zeros(flat).unwrap();
    let r = mmse_oracle_gaussian(&y2, &m, &mu2, 1.0, 0.0);
    assert!(matches!(r, Err(Error::Validation(_))), "{r:?}");
    assert!(mmse_oracle_gaussian(&FrameSequence::new(one, vec![1.0]).unwrap(), sum.as_ref(), &mu2, 1.0, 0.0).is_ok());
}

#[test]
fn scalar_oracle_matches_monte_carlo_conditioning() {
    // X ~ N(0,1), Y = X + N(0,1): E[X | Y≈y] by rejection sampling against the closed form y/2
    let d = Dims::new(1, 1, 1, 1);
    let id = Identity::new(d).unwrap();
    let y0 = 0.8;
    let oracle = mmse_oracle_gaussian(&FrameSequence::new(d, vec![y0]).unwrap(), &id, &FrameSequence::zeros(d).unwrap(), 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut sum, mut sum2, mut n) = (0.0, 0.0, 0usize);
    for _ in 0..2_000_000 {
        let x: f64 = rng.sample(rand_distr::StandardNormal);
        let e: f64 = rng.sample(rand_distr::StandardNormal);
        if (x + e - y0).abs() < 0.01 {
            sum += x;
            sum2 += x * x;
            n += 1;
        }
    }
    let mean = sum / n as f64;
    let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - oracle.data()[0]).abs() < 4.0 * se, "{mean} vs {} (se {se})", oracle.data()[0]);
}

#[test]
fn deviation_shrinks_with_more_samples() {
    let dims = Dims::new(2, 4, 4, 1);
    let op = Task::new(TaskKind::Deblur).build(dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x = random_seq(dims, &mut rng);
    let mu = FrameSequence::filled(dims, 0.5).unwrap();
    let post = GaussianPosterior::new(&op.forward(&x).unwrap(), op.as_ref(), &mu, 0.05, 1e-3).unwrap();
    let ks = [1, 2, 4, 8, 16];
    let devs = deviation_curve(&ks, 200, post.mean(), |_| (0..16).map(|_| post.sample(&mut rng)).collect()).unwrap();
    assert!(devs.windows(2).all(|w| w[1] <= w[0]), "{devs:?}");
    assert!(devs[4] < devs[0]);
}

#[test]
fn latent_stack_shapes() {
    let s = LatentStack::repeated(&[1.0, 2.0], 3).unwrap();
    assert_eq!((s.dim(), s.frames()), (2, 3));
    assert_eq!(s.frame(2), &[1.0, 2.0]);
    let id: &dyn LinearOp = &Identity::new(Dims::new(1, 1, 1, 1)).unwrap();
    assert_eq!(id.output_dims(), Dims::new(1, 1, 1, 1));
}
