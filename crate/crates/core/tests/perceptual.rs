use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use vidrestore::filter::Kernel2d;
use vidrestore::perceptual::{
    pyramid_build_filters, v1_energy, PerceptualConfig, PerceptualEncoder, PyramidConfig, Retina, RetinaParams,
};
use vidrestore::seqio::{Dims, FrameSequence};

fn random_frame(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Direct spatial circular convolution, independent of the FFT path.
fn conv(x: &[f64], h: usize, w: usize, k: &Kernel2d) -> Vec<f64> {
    let r = k.radius as i64;
    let side = k.side();
    let mut out = vec![0.0; h * w];
    for i in 0..h as i64 {
        for j in 0..w as i64 {
            let mut acc = 0.0;
            for a in 0..side as i64 {
                for b in 0..side as i64 {
                    let src_i = (i - (a - r)).rem_euclid(h as i64) as usize;
                    let src_j = (j - (b - r)).rem_euclid(w as i64) as usize;
                    acc += k.taps[(a as usize) * side + b as usize] * x[src_i * w + src_j];
                }
            }
            out[(i as usize) * w + j as usize] = acc;
        }
    }
    out
}

fn retina_oracle(x: &[f64], h: usize, w: usize, p: &RetinaParams) -> Vec<f64> {
    let y1 = conv(x, h, w, &p.center_surround_kernel());
    let lum = conv(x, h, w, &p.luminance_kernel());
    let y2: Vec<f64> = y1.iter().zip(&lum).map(|(y, l)| y / (1.0 + p.alpha * l)).collect();
    let sq: Vec<f64> = y2.iter().map(|v| v * v).collect();
    let con = conv(&sq, h, w, &p.contrast_kernel());
    y2.iter()
        .zip(&con)
        .map(|(y, q)| {
            let z = y / (1.0 + p.beta * (q + p.eps).sqrt());
            (1.0 + z.exp()).ln()
        })
        .collect()
}

#[test]
fn retina_matches_direct_staged_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (h, w) in [(8, 8), (12, 10)] {
        let p = RetinaParams::default();
        let retina = Retina::new(p, h, w).unwrap();
        let x = random_frame(h * w, &mut rng);
        let (got, _) = retina.forward(&x).unwrap();
        let want = retina_oracle(&x, h, w, &p);
        let err = got.iter().zip(&want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-6, "{h}x{w}: {err}");
    }
}

#[test]
fn retina_vjp_dot_product_and_finite_differences() {
    let (h, w) = (8, 8);
    let retina = Retina::new(RetinaParams::default(), h, w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_frame(h * w, &mut rng);
    let u: Vec<f64> = (0..h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (fx, tape) = retina.forward(&x).unwrap();
    let g = retina.vjp(&tape, &c).unwrap();

    let step = 1e-6;
    let shifted: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + step * b).collect();
    let (fs, _) = retina.forward(&shifted).unwrap();
    let ju_w: f64 = fs.iter().zip(&fx).zip(&c).map(|((a, b), c)| (a - b) / step * c).sum();
    let u_jtw: f64 = u.iter().zip(&g).map(|(a, b)| a * b).sum();
    assert!((ju_w - u_jtw).abs() / u_jtw.abs() < 1e-5);

    let h_fd = 1e-4;
    let probe = |v: &[f64]| -> f64 { retina.forward(v).unwrap().0.iter().zip(&c).map(|(a, b)| a * b).sum() };
    let mut worst: f64 = 0.0;
    let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 0..h * w {
        let mut p = x.clone();
        let mut m = x.clone();
        p[i] += h_fd;
        m[i] -= h_fd;
        let fd = (probe(&p) - probe(&m)) / (2.0 * h_fd);
        worst = worst.max((fd - g[i]).abs() / scale);
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn full_chain_gradient_matches_finite_differences() {
    let enc = PerceptualEncoder::new(&PerceptualConfig::default(), 12, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_frame(144, &mut rng);
    let wts: Vec<f64> = (0..enc.feature_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, tape) = enc.encode_frame(&x).unwrap();
    let g = enc.frame_vjp(&tape, &wts).unwrap();
    let probe = |v: &[f64]| -> f64 { enc.encode_frame(v).unwrap().0.values.iter().zip(&wts).map(|(a, b)| a * b).sum() };
    let h = 1e-5;
    let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut p = x.clone();
        let mut m = x.clone();
        p[i] += h;
        m[i] -= h;
        worst = worst.max(((probe(&p) - probe(&m)) / (2.0 * h) - g[i]).abs() / scale);
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn sequence_gradient_is_additive_over_frames() {
    let enc = PerceptualEncoder::new(&PerceptualConfig::default(), 12, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seq = FrameSequence::new(Dims::new(3, 12, 12, 1), random_frame(3 * 144, &mut rng)).unwrap();
    let (_, tapes) = enc.encode_sequence(&seq).unwrap();
    let d = enc.feature_dim();
    let mut cot = vec![vec![0.0; d]; 3];
    cot[1] = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let g = enc.encode_vjp(&tapes, &cot).unwrap();
    assert!(g.frame(0).iter().chain(g.frame(2)).all(|v| *v == 0.0));
    assert!(g.frame(1).iter().any(|v| *v != 0.0));
    let alone = enc.frame_vjp(&tapes[1], &cot[1]).unwrap();
    assert_eq!(alone.as_slice(), g.frame(1));
}

#[test]
fn per_frame_encoding_equals_batch() {
    let enc = PerceptualEncoder::new(&PerceptualConfig::default(), 16, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let seq = FrameSequence::new(Dims::new(4, 16, 16, 1), random_frame(4 * 256, &mut rng)).unwrap();
    let (batch, _) = enc.encode_sequence(&seq).unwrap();
    for (t, f) in batch.iter().enumerate() {
        assert_eq!(f.values, enc.encode_frame(seq.frame(t)).unwrap().0.values);
    }
}

#[test]
fn tiling_holds_for_several_configs() {
    for (s, k, n) in [(1, 2, 16), (3, 4, 64), (2, 6, 32), (1, 4, 24)] {
        let f = pyramid_build_filters(PyramidConfig::new(s, k, n, n)).unwrap();
        assert!(f.tiling_residual() < 1e-6, "S={s} K={k} {n}");
    }
}

#[test]
fn pyramid_is_linear() {
    let filters = pyramid_build_filters(PyramidConfig::new(3, 4, 32, 32)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random_frame(1024, &mut rng);
    let y = random_frame(1024, &mut rng);
    let (a, b) = (0.7, -1.9);
    let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
    let (bx, by, bc) = (
        filters.forward_bands(&x).unwrap(),
        filters.forward_bands(&y).unwrap(),
        filters.forward_bands(&combo).unwrap(),
    );
    for s in 0..bc.len() {
        for k in 0..bc[s].len() {
            for i in 0..bc[s][k].len() {
                let want: Complex64 = bx[s][k][i] * a + by[s][k][i] * b;
                assert!((bc[s][k][i] - want).norm() < 1e-9);
            }
        }
    }
}

fn band_energies(filters: &vidrestore::perceptual::PyramidFilters, image: &[f64]) -> Vec<Vec<f64>> {
    filters
        .forward_bands(image)
        .unwrap()
        .iter()
        .map(|level| level.iter().map(|b| b.iter().map(|z| z.norm_sqr()).sum()).collect())
        .collect()
}

#[test]
fn sinusoid_at_band_peak_concentrates_energy() {
    // Peak of the finest band is at half the Nyquist radius; 8 cycles across 32 pixels.
    let n = 32;
    let img: Vec<f64> = (0..n * n).map(|p| (2.0 * std::f64::consts::PI * 8.0 * (p % n) as f64 / n as f64).cos()).collect();

    let two = pyramid_build_filters(PyramidConfig::new(3, 2, n, n)).unwrap();
    let e = band_energies(&two, &img);
    let total: f64 = e.iter().flatten().sum();
    assert!(e[0][0] / total > 0.9, "{e:?}");

    // Four orientations: cos³ leakage into the ±45° neighbours is intrinsic (1 : 1/8 : 0 : 1/8),
    // so the scale holds the energy and the aligned band dominates.
    let four = pyramid_build_filters(PyramidConfig::new(3, 4, n, n)).unwrap();
    let e = band_energies(&four, &img);
    let total: f64 = e.iter().flatten().sum();
    let scale0: f64 = e[0].iter().sum();
    assert!(scale0 / total > 0.99);
    assert!((e[0][0] / total - 0.8).abs() < 1e-6, "{e:?}");
    assert!(e[0][1..].iter().all(|v| *v < e[0][0]));
}

#[test]
fn shifted_input_gives_shifted_energies() {
    let enc = PerceptualEncoder::new(&PerceptualConfig::default(), 16, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_frame(256, &mut rng);
    // Shift by the coarsest grid stride so every scale shifts by a whole number of its pixels.
    let stride = 1 << (enc.pyramid_config().scales - 1);
    let shifted: Vec<f64> = (0..256).map(|p| x[(p / 16) * 16 + (p % 16 + 16 - stride) % 16]).collect();
    let (fa, _) = enc.encode_frame(&x).unwrap();
    let (fb, _) = enc.encode_frame(&shifted).unwrap();
    let total_a: f64 = fa.values.iter().sum();
    let total_b: f64 = fb.values.iter().sum();
    assert!((total_a - total_b).abs() < 1e-9 * total_a);
}

#[test]
fn energy_matches_squared_magnitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bands: Vec<Vec<Vec<Complex64>>> = (0..2)
        .map(|_| (0..3).map(|_| (0..5).map(|_| Complex64::new(rng.random(), rng.random())).collect()).collect())
        .collect();
    let e = v1_energy(&bands);
    let oracle: Vec<f64> = bands.iter().flatten().flatten().map(|z| z.re * z.re + z.im * z.im).collect();
    assert_eq!(e, oracle);
}
