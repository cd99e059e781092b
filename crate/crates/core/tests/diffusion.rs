use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use vidrestore::degrade::{Degradation, Identity, Task, TaskKind};
use vidrestore::diffusion::{
    build_schedule, data_consistency, ddim_invert, ddim_reverse, gaussian_prior_predict_noise, measurement_lift,
    GaussianAnalyticPrior, IdentityCodec, LatentCodec, NoiseSchedule, OrthoCodec, Restorer, SolverConfig,
};
use vidrestore::metrics::psnr;
use vidrestore::seqio::{make_synthetic, Dims, FrameSequence, SyntheticKind, SyntheticSpec};

fn texture(frames: usize, side: usize, seed: u64) -> FrameSequence {
    make_synthetic(&SyntheticSpec::new(SyntheticKind::TranslatingTexture, frames, side, side, 1.0, seed)).unwrap()
}

fn restorer(y: FrameSequence, op: Degradation, side: usize) -> Restorer {
    let prior = Arc::new(GaussianAnalyticPrior::constant(side * side, 0.5, 0.05).unwrap());
    Restorer::new(y, op, prior, Arc::new(IdentityCodec::new(side, side, 1)), NoiseSchedule::default()).unwrap()
}

#[test]
fn gaussian_noise_prediction_matches_monte_carlo() {
    // scalar prior N(0, 1) at ᾱ = 0.25; E[ε|z] is linear in z, so compare regression slopes
    let schedule = build_schedule(1, 0.75, 0.75).unwrap();
    assert!((schedule.alpha_bar(1) - 0.25).abs() < 1e-15);
    let formula = gaussian_prior_predict_noise(&[1.0], 1, &[0.0], 1.0, &schedule).unwrap()[0];

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 1_000_000;
    let (mut szz, mut sze) = (0.0, 0.0);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        let z = 0.5 * z0 + 0.75f64.sqrt() * e;
        szz += z * z;
        sze += z * e;
        pairs.push((z, e));
    }
    let slope = sze / szz;
    let resid: f64 = pairs.iter().map(|(z, e)| (e - slope * z).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (resid / szz).sqrt();
    assert!((slope - formula).abs() < 3.0 * se, "slope {slope} formula {formula} se {se}");
}

#[test]
fn ddim_inversion_round_trips() {
    let schedule = NoiseSchedule::default();
    let prior = GaussianAnalyticPrior::constant(64, 0.5, 0.05).unwrap();
    let x = texture(1, 8, 3);
    for tau in [1, 10, 35, 50] {
        let z = ddim_invert(x.data(), &prior, &schedule, tau).unwrap();
        let back = ddim_reverse(&z, &prior, &schedule, tau).unwrap();
        let err = back.iter().zip(x.data()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-3, "tau {tau}: {err}");
    }
}

#[test]
fn zero_start_step_is_consistency_only() {
    let x = texture(4, 16, 1);
    let op = Task::new(TaskKind::Deblur).build(x.dims()).unwrap();
    let y = op.forward(&x).unwrap();
    let r = restorer(y.clone(), op.clone(), 16);
    let cfg = SolverConfig {
        start_step: 0,
        ..Default::default()
    };
    let out = r.solve(&cfg).unwrap();
    assert!(out.log.is_empty());

    let lifted = measurement_lift(&y, &op).unwrap();
    let init = FrameSequence::from_frames(16, 16, 1, &vec![lifted.frame(0).to_vec(); 4]).unwrap();
    let want = data_consistency(&init, &y, op.as_ref(), cfg.cg_iterations).unwrap().estimate;
    assert_eq!(out.pixels, want);
}

#[test]
fn solve_is_deterministic() {
    let x = texture(4, 16, 2);
    let op = Task::new(TaskKind::TemporalBlur).build(x.dims()).unwrap();
    let r = restorer(op.forward(&x).unwrap(), op, 16);
    let cfg = SolverConfig::default().with_seed(9);
    let (a, b) = (r.solve(&cfg).unwrap(), r.solve(&cfg).unwrap());
    assert_eq!(a.pixels, b.pixels);
    assert_eq!(a.latent, b.latent);
    assert_ne!(a.pixels, r.solve(&cfg.with_seed(10)).unwrap().pixels);
}

#[test]
fn residual_log_is_recorded_per_step() {
    let x = texture(4, 16, 4);
    let op = Task::new(TaskKind::Sr).build(x.dims()).unwrap();
    let r = restorer(op.forward(&x).unwrap(), op, 16);
    let out = r.solve(&SolverConfig::default()).unwrap();
    assert_eq!(out.log.len(), 35);
    assert_eq!(out.log.first().unwrap().step, 35);
    assert_eq!(out.log.last().unwrap().step, 1);
    assert!(out.log.iter().all(|s| s.residual.is_finite() && s.ps_loss.is_none()));
}

#[test]
fn deblurring_beats_the_measurement_by_three_db() {
    let (mut gain, seeds) = (0.0, 10);
    for seed in 0..seeds {
        let x = texture(4, 32, seed);
        let op = Task::new(TaskKind::Deblur).build(x.dims()).unwrap();
        let y = op.forward(&x).unwrap();
        let r = restorer(y.clone(), op, 32);
        let cfg = SolverConfig {
            start_step: 50,
            cg_iterations: 20,
            seed,
            ..Default::default()
        };
        let out = r.solve(&cfg).unwrap();
        gain += psnr(&x, &out.pixels, 1.0).unwrap() - psnr(&x, &y, 1.0).unwrap();
    }
    let mean = gain / seeds as f64;
    assert!(mean >= 3.0, "mean gain {mean:.2} dB");
}

#[test]
fn identity_operator_reproduces_measurements() {
    let x = texture(4, 16, 5);
    let op: Degradation = Arc::new(Identity::new(x.dims()).unwrap());
    let r = restorer(x.clone(), op, 16);
    let out = r.solve(&SolverConfig::default()).unwrap();
    assert!(out.pixels.max_abs_diff(&x).unwrap() < 1e-10);
}

#[test]
fn ortho_codec_restores_through_a_truncated_latent() {
    let x = texture(4, 16, 6);
    let op = Task::new(TaskKind::Deblur).build(x.dims()).unwrap();
    let y = op.forward(&x).unwrap();
    let codec = Arc::new(OrthoCodec::new(16, 16, 1, 0.5).unwrap());
    let mean = codec.encode_frame(&vec![0.5; 256]);
    let prior = Arc::new(GaussianAnalyticPrior::new(mean, 0.05).unwrap());
    let r = Restorer::new(y.clone(), op, prior, codec.clone(), NoiseSchedule::default()).unwrap();
    let out = r.solve(&SolverConfig::default()).unwrap();
    assert_eq!(out.latent.dim(), codec.latent_dim());
    assert!(psnr(&x, &out.pixels, 1.0).unwrap() > psnr(&x, &y, 1.0).unwrap());
}

#[test]
fn mismatched_components_are_rejected() {
    let dims = Dims::new(4, 16, 16, 1);
    let op = Task::new(TaskKind::Sr).build(dims).unwrap();
    let wrong_y = FrameSequence::zeros(dims).unwrap();
    let prior = Arc::new(GaussianAnalyticPrior::constant(256, 0.5, 0.05).unwrap());
    assert!(Restorer::new(wrong_y, op, prior, Arc::new(IdentityCodec::new(16, 16, 1)), NoiseSchedule::default()).is_err());
}
