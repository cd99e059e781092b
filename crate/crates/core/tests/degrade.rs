use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vidrestore::degrade::{
    adjoint_test, BoxDownsample, Compose, Degradation, GaussianBlur, Identity, LinearOp, Task, TaskKind, TemporalAverage,
};
use vidrestore::filter::three_sigma_radius;
use vidrestore::seqio::{Dims, FrameSequence};
use vidrestore::{Error, Result};

fn random(dims: Dims, rng: &mut ChaCha8Rng) -> FrameSequence {
    FrameSequence::new(dims, (0..dims.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn all_ops(dims: Dims) -> Vec<Degradation> {
    TaskKind::ALL.iter().map(|k| Task::new(*k).build(dims).unwrap()).collect()
}

#[test]
fn operators_are_linear() {
    let dims = Dims::new(8, 16, 16, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for op in all_ops(dims) {
        let (x, y) = (random(dims, &mut rng), random(dims, &mut rng));
        let (a, b) = (1.3, -0.4);
        let combo = x.with_data(x.data().iter().zip(y.data()).map(|(u, v)| a * u + b * v).collect()).unwrap();
        let lhs = op.forward(&combo).unwrap();
        let (fx, fy) = (op.forward(&x).unwrap(), op.forward(&y).unwrap());
        let rhs = fx.with_data(fx.data().iter().zip(fy.data()).map(|(u, v)| a * u + b * v).collect()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12, "{}", op.describe());
    }
}

#[test]
fn adjoints_pass_on_desk_fixtures() {
    let dims = Dims::new(8, 16, 16, 1);
    for op in all_ops(dims) {
        assert!(adjoint_test(op.as_ref(), 3, 2).unwrap() < 1e-5, "{}", op.describe());
    }
    let rgb = Dims::new(3, 8, 8, 3);
    for op in all_ops(rgb) {
        assert!(adjoint_test(op.as_ref(), 3, 2).unwrap() < 1e-5, "{}", op.describe());
    }
}

#[test]
fn constants_are_fixed_points() {
    let dims = Dims::new(6, 16, 16, 1);
    let c = FrameSequence::filled(dims, 0.37).unwrap();
    let blur = GaussianBlur::new(dims, 3.0).unwrap();
    let avg = TemporalAverage::new(dims, 7).unwrap();
    let down = BoxDownsample::new(dims, 4).unwrap();
    assert!(blur.forward(&c).unwrap().max_abs_diff(&c).unwrap() < 1e-12);
    assert!(avg.forward(&c).unwrap().max_abs_diff(&c).unwrap() < 1e-12);
    let d = down.forward(&c).unwrap();
    assert_eq!(d.dims(), Dims::new(6, 4, 4, 1));
    assert!(d.data().iter().all(|v| (v - 0.37).abs() < 1e-12));
}

#[test]
fn downsample_paper_size() {
    let down = BoxDownsample::new(Dims::new(1, 768, 1280, 3), 4).unwrap();
    assert_eq!(down.output_dims(), Dims::new(1, 192, 320, 3));
}

#[test]
fn impulse_blur_shows_wrapped_kernel() {
    let (h, w) = (16, 16);
    let dims = Dims::new(1, h, w, 1);
    let sigma = 1.2;
    let mut data = vec![0.0; h * w];
    data[0] = 1.0;
    let out = GaussianBlur::new(dims, sigma).unwrap().forward(&FrameSequence::new(dims, data).unwrap()).unwrap();
    let r = three_sigma_radius(sigma) as i64;
    let g: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = g.iter().sum();
    let mut want = vec![0.0; h * w];
    for (a, ga) in (-r..=r).zip(&g) {
        for (b, gb) in (-r..=r).zip(&g) {
            let i = a.rem_euclid(h as i64) as usize;
            let j = b.rem_euclid(w as i64) as usize;
            want[i * w + j] += ga * gb / (s * s);
        }
    }
    let err = out.data().iter().zip(&want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-12, "{err}");
}

#[test]
fn temporal_average_matches_explicit_matrix() {
    let dims = Dims::new(20, 3, 4, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random(dims, &mut rng);
    for window in [7, 13] {
        let op = TemporalAverage::new(dims, window).unwrap();
        // half-sample symmetric reflection, built independently of the operator
        let t = dims.frames as i64;
        let reflect = |j: i64| -> usize {
            let p = j.rem_euclid(2 * t);
            (if p < t { p } else { 2 * t - 1 - p }) as usize
        };
        let half = (window / 2) as i64;
        let mut m = vec![0.0; 20 * 20];
        for i in 0..t {
            for k in -half..=half {
                m[i as usize * 20 + reflect(i + k)] += 1.0 / window as f64;
            }
        }
        assert!(op.weight_matrix().iter().zip(&m).all(|(a, b)| (a - b).abs() < 1e-15));
        let fl = dims.frame_len();
        let mut want = vec![0.0; dims.len()];
        for i in 0..20 {
            for j in 0..20 {
                for p in 0..fl {
                    want[i * fl + p] += m[i * 20 + j] * x.data()[j * fl + p];
                }
            }
        }
        let got = op.forward(&x).unwrap();
        assert!(got.data().iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-6));
        assert!(adjoint_test(&op, 3, 4).unwrap() < 1e-6);
    }
}

#[test]
fn centered_average_of_ramp() {
    let dims = Dims::new(7, 1, 1, 1);
    let x = FrameSequence::new(dims, (1..=7).map(f64::from).collect()).unwrap();
    let y = TemporalAverage::new(dims, 7).unwrap().forward(&x).unwrap();
    assert!((y.data()[3] - 4.0).abs() < 1e-12);
    assert!(TemporalAverage::new(dims, 6).is_err());
}

#[test]
fn compose_behaviour() {
    let dims = Dims::new(8, 16, 16, 1);
    let id: Degradation = Arc::new(Identity::new(dims).unwrap());
    let twice = Compose::new(vec![id.clone(), id]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random(dims, &mut rng);
    assert_eq!(twice.forward(&x).unwrap(), x);

    let sr_plus = Task::new(TaskKind::SrPlus).build(dims).unwrap();
    assert_eq!(sr_plus.output_dims(), Dims::new(8, 4, 4, 1));
    let avg = TemporalAverage::new(dims, 7).unwrap();
    let down = BoxDownsample::new(dims, 4).unwrap();
    let manual = down.forward(&avg.forward(&x).unwrap()).unwrap();
    assert!(sr_plus.forward(&x).unwrap().max_abs_diff(&manual).unwrap() < 1e-14);
    assert!(adjoint_test(sr_plus.as_ref(), 3, 6).unwrap() < 1e-5);
}

/// Blur whose adjoint is off by a factor of two.
#[derive(Debug)]
struct BrokenAdjoint(GaussianBlur);

impl LinearOp for BrokenAdjoint {
    fn input_dims(&self) -> Dims {
        self.0.input_dims()
    }
    fn output_dims(&self) -> Dims {
        self.0.output_dims()
    }
    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        self.0.forward(x)
    }
    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        let a = self.0.adjoint(y)?;
        a.with_data(a.data().iter().map(|v| 2.0 * v).collect())
    }
    fn describe(&self) -> String {
        "broken".into()
    }
}

#[test]
fn adjoint_test_catches_a_scale_bug() {
    let dims = Dims::new(2, 8, 8, 1);
    assert!(adjoint_test(&Identity::new(dims).unwrap(), 3, 1).unwrap() < 1e-12);
    let broken = BrokenAdjoint(GaussianBlur::new(dims, 1.0).unwrap());
    assert!(adjoint_test(&broken, 3, 1).unwrap() > 0.1);
}

#[test]
fn mismatched_input_is_rejected() {
    let op = GaussianBlur::new(Dims::new(2, 8, 8, 1), 1.0).unwrap();
    let x = FrameSequence::zeros(Dims::new(3, 8, 8, 1)).unwrap();
    assert!(matches!(op.forward(&x), Err(Error::Validation(_))));
}
